//! Machine-checkable claim records and the JSON-lines run ledger.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, Q};
use crate::registry::Registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Verified,
    Reported,
    Violated,
}

impl Verdict {
    /// `Reported` unless the claim is asserted; asserted claims pass or fail on `holds`.
    pub fn of(holds: bool, asserted: bool) -> Verdict {
        match (asserted, holds) {
            (false, _) => Verdict::Reported,
            (true, true) => Verdict::Verified,
            (true, false) => Verdict::Violated,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::Reported => "reported",
            Verdict::Violated => "violated",
        }
    }

    pub fn parse(s: &str) -> Result<Verdict> {
        match s {
            "verified" => Ok(Verdict::Verified),
            "reported" => Ok(Verdict::Reported),
            "violated" => Ok(Verdict::Violated),
            _ => Err(Error::Parse(format!("unknown verdict {s:?}"))),
        }
    }
}

/// Sorted-key compact JSON.
pub fn canonical_json(v: &Value) -> String {
    serde_json::to_string(v).expect("values serialize")
}

pub fn digest(v: &Value) -> String {
    let h = Sha256::digest(canonical_json(v).as_bytes());
    h.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub claim_id: String,
    pub reference: String,
    pub schedule: Value,
    pub inputs_digest: String,
    pub values: BTreeMap<String, String>,
    pub verdict: Verdict,
    pub stage: u32,
    pub net: Option<String>,
    pub odd_guard: String,
    pub seed: Option<u64>,
}

impl Certificate {
    pub fn new(claim_id: &str, reference: &str, reg: &Registry, stage: u32, inputs: &Value) -> Self {
        Certificate {
            claim_id: claim_id.to_string(),
            reference: reference.to_string(),
            schedule: reg.schedule().to_json(),
            inputs_digest: digest(inputs),
            values: BTreeMap::new(),
            verdict: Verdict::Reported,
            stage,
            net: None,
            odd_guard: reg.odd_guard().as_str().to_string(),
            seed: None,
        }
    }

    pub fn value(mut self, name: &str, v: &Q) -> Self {
        self.values.insert(name.to_string(), fmt_q(v));
        self
    }

    pub fn count(mut self, name: &str, v: u64) -> Self {
        self.values.insert(name.to_string(), v.to_string());
        self
    }

    pub fn verdict(mut self, v: Verdict) -> Self {
        self.verdict = v;
        self
    }

    pub fn with_run(mut self, net: Option<String>, seed: Option<u64>) -> Self {
        self.net = net;
        self.seed = seed;
        self
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }

    pub fn to_json(&self) -> Value {
        json!({
            "claim_id": self.claim_id,
            "reference": self.reference,
            "schedule": self.schedule,
            "inputs_digest": self.inputs_digest,
            "values": self.values,
            "verdict": self.verdict.as_str(),
            "stage": self.stage,
            "net": self.net,
            "odd_guard": self.odd_guard,
            "seed": self.seed,
        })
    }

    pub fn to_canonical(&self) -> String {
        canonical_json(&self.to_json())
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let s = |k: &str| {
            v.get(k).and_then(Value::as_str).map(str::to_string).ok_or_else(|| Error::Parse(format!("certificate field {k}")))
        };
        let values = v
            .get("values")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse("certificate values".into()))?
            .iter()
            .map(|(k, x)| Ok((k.clone(), x.as_str().ok_or_else(|| Error::Parse(format!("value {k}")))?.to_string())))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Certificate {
            claim_id: s("claim_id")?,
            reference: s("reference")?,
            schedule: v.get("schedule").cloned().unwrap_or(Value::Null),
            inputs_digest: s("inputs_digest")?,
            values,
            verdict: Verdict::parse(&s("verdict")?)?,
            stage: v.get("stage").and_then(Value::as_u64).unwrap_or(0) as u32,
            net: v.get("net").and_then(Value::as_str).map(str::to_string),
            odd_guard: s("odd_guard")?,
            seed: v.get("seed").and_then(Value::as_u64),
        })
    }
}

/// Append-only JSON-lines sink.
#[derive(Debug, Clone)]
pub struct Ledger {
    path: PathBuf,
}

impl Ledger {
    pub fn new(path: impl AsRef<Path>) -> Self {
        Ledger { path: path.as_ref().to_path_buf() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, c: &Certificate) -> std::io::Result<()> {
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        writeln!(f, "{}", c.to_canonical())
    }

    pub fn read(&self) -> Result<Vec<Certificate>> {
        let text = std::fs::read_to_string(&self.path).map_err(|e| Error::Parse(e.to_string()))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let v: Value = serde_json::from_str(l).map_err(|e| Error::Parse(e.to_string()))?;
                Certificate::from_json(&v)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::registry::{OddGuard, Which};
    use crate::schedule::ParameterSchedule;

    #[test]
    fn canonical_and_round_trip() {
        let reg = Registry::new(ParameterSchedule::toy_small(), Which::XK, OddGuard::Enforce);
        let c = Certificate::new("demo", "x = x", &reg, 3, &json!({"b": 1, "a": [2]}))
            .value("half", &q(1, 2))
            .count("n", 4)
            .verdict(Verdict::of(true, true));
        let s = c.to_canonical();
        assert!(s.find("\"claim_id\"").unwrap() < s.find("\"values\"").unwrap());
        let back = Certificate::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_canonical(), s);
        assert_eq!(digest(&json!({"a": [2], "b": 1})), c.inputs_digest);
    }

    #[test]
    fn verdict_rules() {
        assert_eq!(Verdict::of(false, false), Verdict::Reported);
        assert_eq!(Verdict::of(false, true), Verdict::Violated);
        assert_eq!(Verdict::of(true, true), Verdict::Verified);
    }
}
