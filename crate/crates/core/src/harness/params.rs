use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::{LabError, Result};

/// Typed access to one grid cell's parameters. Every read is remembered,
/// with its default filled in, so rows can carry all resolved parameters.
pub(crate) struct ParamReader<'a> {
    values: &'a BTreeMap<String, Value>,
    read: Vec<(String, Value)>,
}

impl<'a> ParamReader<'a> {
    pub fn new(values: &'a BTreeMap<String, Value>) -> Self {
        Self { values, read: Vec::new() }
    }

    fn raw(&mut self, key: &str) -> Option<&'a Value> {
        // a key counts as known even when its value fails to parse
        if !self.read.iter().any(|(k, _)| k == key) {
            self.note(key, Value::Null);
        }
        self.values.get(key).filter(|v| !v.is_null())
    }

    fn note(&mut self, key: &str, value: Value) {
        match self.read.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.read.push((key.to_string(), value)),
        }
    }

    /// Replaces the recorded value of `key`, e.g. once a default is derived.
    pub fn set(&mut self, key: &str, value: Value) {
        self.note(key, value);
    }

    fn wrong(key: &str, want: &str, got: &Value) -> LabError {
        LabError::InvalidInput(format!("parameter {key:?} must be {want}, got {got}"))
    }

    pub fn opt_f64(&mut self, key: &str) -> Result<Option<f64>> {
        let v = match self.raw(key) {
            None => None,
            Some(v) => Some(v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| Self::wrong(key, "a number", v))?),
        };
        self.note(key, v.map_or(Value::Null, Value::from));
        Ok(v)
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.opt_f64(key)?.unwrap_or(default);
        self.set(key, Value::from(v));
        Ok(v)
    }

    pub fn opt_u64(&mut self, key: &str) -> Result<Option<u64>> {
        let v = match self.raw(key) {
            None => None,
            Some(v) => Some(v.as_u64().ok_or_else(|| Self::wrong(key, "a nonnegative integer", v))?),
        };
        self.note(key, v.map_or(Value::Null, Value::from));
        Ok(v)
    }

    pub fn u64(&mut self, key: &str, default: u64) -> Result<u64> {
        let v = self.opt_u64(key)?.unwrap_or(default);
        self.set(key, Value::from(v));
        Ok(v)
    }

    pub fn opt_usize(&mut self, key: &str) -> Result<Option<usize>> {
        self.opt_u64(key)?
            .map(|v| usize::try_from(v).map_err(|_| LabError::InvalidInput(format!("parameter {key:?} too large"))))
            .transpose()
    }

    pub fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        let v = self.opt_usize(key)?.unwrap_or(default);
        self.set(key, Value::from(v));
        Ok(v)
    }

    pub fn u32(&mut self, key: &str, default: u32) -> Result<u32> {
        let v = self.u64(key, default.into())?;
        u32::try_from(v).map_err(|_| LabError::InvalidInput(format!("parameter {key:?} too large")))
    }

    pub fn bool(&mut self, key: &str, default: bool) -> Result<bool> {
        let v = match self.raw(key) {
            None => default,
            Some(v) => v.as_bool().ok_or_else(|| Self::wrong(key, "a boolean", v))?,
        };
        self.note(key, Value::from(v));
        Ok(v)
    }

    pub fn string(&mut self, key: &str, default: &str) -> Result<String> {
        let v = match self.raw(key) {
            None => default.to_string(),
            Some(v) => v.as_str().ok_or_else(|| Self::wrong(key, "a string", v))?.to_string(),
        };
        self.note(key, Value::from(v.clone()));
        Ok(v)
    }

    /// Resolved parameters in read order; fails on keys nobody read.
    pub fn finish(self) -> Result<Vec<(String, Value)>> {
        if let Some(unknown) = self.values.keys().find(|k| !self.read.iter().any(|(r, _)| r == *k)) {
            return Err(LabError::InvalidInput(format!("unknown parameter {unknown:?}")));
        }
        Ok(self.read)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_types_and_unknown_keys() {
        let map: BTreeMap<String, Value> = serde_json::from_str(r#"{"gamma": 0.1, "m": 50, "flag": true}"#).unwrap();
        let mut r = ParamReader::new(&map);
        assert_eq!(r.f64("gamma", 0.2).unwrap(), 0.1);
        assert_eq!(r.usize("m", 10).unwrap(), 50);
        assert_eq!(r.usize("rounds", 7).unwrap(), 7);
        assert!(r.f64("flag", 0.0).is_err());
        let resolved = r.finish().unwrap();
        assert_eq!(resolved[2], ("rounds".to_string(), Value::from(7)));

        let mut r = ParamReader::new(&map);
        r.f64("gamma", 0.2).unwrap();
        assert!(r.finish().is_err());
    }
}
