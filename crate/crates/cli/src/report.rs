//! Verification report: one JSON document, stable field order, reals as
//! decimal strings. Only the `timestamp` header varies between runs.

use crate::config::{Suite, SuiteConfig};
use kforge_core::precision::{decimal_short, CBall};
use rug::Float;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Accepted,
    Rejected,
    /// Outside the implemented regime.
    Unsupported(String),
    /// A truncation or finiteness check could not certify the result.
    Inconclusive,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Accepted => "accepted",
            Status::Rejected => "rejected",
            Status::Unsupported(_) => "skipped: unsupported",
            Status::Inconclusive => "inconclusive",
        }
    }
}

impl Serialize for Status {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// Ordered string pairs serialized as a JSON object.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Fields(pub Vec<(String, String)>);

impl Fields {
    pub fn push(&mut self, k: &str, v: impl ToString) {
        self.0.push((k.to_string(), v.to_string()));
    }

    pub fn get(&self, k: &str) -> Option<&str> {
        self.0.iter().find(|(a, _)| a == k).map(|(_, b)| b.as_str())
    }
}

impl Serialize for Fields {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Clone, Debug)]
pub struct NamedValue {
    pub name: String,
    pub value: CBall,
}

impl Serialize for NamedValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("NamedValue", 2)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("value", &self.value)?;
        st.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub suite: Suite,
    pub id: String,
    pub check: String,
    pub inputs: Fields,
    pub values: Vec<NamedValue>,
    pub details: serde_json::Value,
    pub residual: String,
    pub tolerance: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Record {
    pub fn new(suite: Suite, id: impl Into<String>, check: &str, inputs: Fields) -> Record {
        Record {
            suite,
            id: id.into(),
            check: check.to_string(),
            inputs,
            values: vec![],
            details: serde_json::Value::Null,
            residual: "n/a".into(),
            tolerance: "n/a".into(),
            status: Status::Inconclusive,
            message: None,
        }
    }

    pub fn value(mut self, name: &str, v: &CBall) -> Record {
        self.values.push(NamedValue { name: name.into(), value: v.clone() });
        self
    }

    pub fn details<T: Serialize>(mut self, d: &T) -> Record {
        self.details = serde_json::to_value(d).expect("serializable details");
        self
    }

    /// Accepted iff residual < tolerance.
    pub fn judge(mut self, residual: &Float, tolerance: &Float) -> Record {
        self.residual = decimal_short(residual);
        self.tolerance = decimal_short(tolerance);
        self.status = if residual < tolerance { Status::Accepted } else { Status::Rejected };
        self
    }

    pub fn judge_f64(self, residual: f64, tolerance: f64) -> Record {
        self.judge(&Float::with_val(64, residual), &Float::with_val(64, tolerance))
    }

    /// Residual and tolerance already judged elsewhere.
    pub fn judged(mut self, residual: &str, tolerance: &str, accepted: bool) -> Record {
        self.residual = residual.to_string();
        self.tolerance = tolerance.to_string();
        self.status = if accepted { Status::Accepted } else { Status::Rejected };
        self
    }

    pub fn exact(mut self, ok: bool) -> Record {
        self.residual = if ok { "0e0" } else { "1e0" }.into();
        self.tolerance = "exact".into();
        self.status = if ok { Status::Accepted } else { Status::Rejected };
        self
    }

    pub fn fail(mut self, err: &kforge_core::Error) -> Record {
        match err {
            kforge_core::Error::Unsupported(m) => {
                self.status = Status::Unsupported(m.clone());
            }
            _ => {
                self.status = Status::Rejected;
            }
        }
        self.message = Some(err.to_string());
        self
    }

    pub fn inconclusive(mut self, why: &str) -> Record {
        self.status = Status::Inconclusive;
        self.message = Some(why.to_string());
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub records: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub skipped: usize,
    pub inconclusive: usize,
}

impl Summary {
    pub fn tally(records: &[Record]) -> Summary {
        let mut s = Summary { records: records.len(), ..Default::default() };
        for r in records {
            match r.status {
                Status::Accepted => s.accepted += 1,
                Status::Rejected => s.rejected += 1,
                Status::Unsupported(_) => s.skipped += 1,
                Status::Inconclusive => s.inconclusive += 1,
            }
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Conventions {
    pub normalization: &'static str,
    pub rho_convention: &'static str,
    pub embedding: &'static str,
}

pub const CONVENTIONS: Conventions = Conventions {
    normalization: "identity",
    rho_convention: "inverse",
    embedding: kforge_core::units::EMBEDDING,
};

/// Run metadata that legitimately differs between runs.
#[derive(Clone, Debug, Serialize)]
pub struct Timestamp {
    pub generated_at: String,
    pub wall_seconds: Vec<(Suite, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub timestamp: Timestamp,
    pub version: &'static str,
    pub conventions: Conventions,
    pub config: SuiteConfig,
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn exit_code(&self) -> i32 {
        if self.summary.rejected > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
