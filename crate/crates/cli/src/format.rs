//! JSON operator files.
//!
//! ```json
//! {
//!   "kind": "channel",
//!   "signature": [2, 2],
//!   "outcomes": [ [ [[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]] ] ],
//!   "metadata": { "label": "..." }
//! }
//! ```
//!
//! Each matrix is a list of rows, each entry a `[re, im]` pair. `signature`
//! is the comb dimension list `d_0, d_1, …` except for `povm`, where it is
//! the single effect dimension.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use exqip::channels::{Channel, Instrument};
use exqip::linalg::{CMatrix, Hermitian};
use exqip::testers::{Povm, Tester};
use exqip::{CombSignature, Gqi, Tolerance, C64};
use serde::{Deserialize, Serialize};

use crate::{Failure, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Gqi,
    Tester,
    Channel,
    Instrument,
    Povm,
    Comb,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Gqi => "gqi",
            Kind::Tester => "tester",
            Kind::Channel => "channel",
            Kind::Instrument => "instrument",
            Kind::Povm => "povm",
            Kind::Comb => "comb",
        })
    }
}

/// Rows of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub kind: Kind,
    pub signature: Vec<usize>,
    pub outcomes: Vec<MatrixRows>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

pub fn encode_matrix(m: &CMatrix) -> MatrixRows {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn decode_matrix(rows: &MatrixRows) -> Result<CMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Failure::input("ragged matrix rows"));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Failure::input("non-finite matrix entry"));
    }
    Ok(CMatrix::from_fn(r, c, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

/// Canonical text: two-space indentation, keys sorted, matrix rows on one
/// line, newline terminated. Parsing and re-writing such
/// text reproduces it byte for byte.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("plain data always serializes");
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    out
}

fn is_flat(v: &serde_json::Value) -> bool {
    use serde_json::Value;
    match v {
        Value::Array(items) => items.iter().all(|x| match x {
            Value::Array(inner) => inner.iter().all(|y| !y.is_array() && !y.is_object()),
            Value::Object(_) => false,
            _ => true,
        }),
        _ => false,
    }
}

fn inline(items: &[serde_json::Value]) -> String {
    let parts: Vec<String> = items
        .iter()
        .map(|x| match x {
            serde_json::Value::Array(inner) => inline(inner),
            _ => x.to_string(),
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

fn write_value(v: &serde_json::Value, indent: usize, out: &mut String) {
    use serde_json::Value;
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Array(items) if is_flat(v) => out.push_str(&inline(items)),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        _ => out.push_str(&v.to_string()),
    }
}

impl OperatorFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: OperatorFile = serde_json::from_str(text).map_err(|e| Failure::input(format!("malformed operator file: {e}")))?;
        file.check_shapes()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }

    /// Full comb signature the outcomes live on.
    pub fn comb_signature(&self) -> Result<CombSignature> {
        let dims = match self.kind {
            Kind::Povm => match self.signature[..] {
                [d] => vec![1, 1, d, 1],
                _ => return Err(Failure::input("povm signature must be the single effect dimension")),
            },
            _ => self.signature.clone(),
        };
        CombSignature::new(dims).map_err(|e| Failure::input(e.to_string()))
    }

    fn check_shapes(&self) -> Result<()> {
        let sig = self.comb_signature()?;
        match self.kind {
            Kind::Channel | Kind::Instrument if sig.teeth() != 1 => {
                return Err(Failure::input(format!("{} signature must be [d0, d1]", self.kind)))
            }
            Kind::Tester if !sig.is_one_tester() => return Err(Failure::input("tester signature must be [1, d1, d2, 1]")),
            _ => {}
        }
        if self.outcomes.is_empty() {
            return Err(Failure::input("no outcomes"));
        }
        if matches!(self.kind, Kind::Channel | Kind::Comb) && self.outcomes.len() != 1 {
            return Err(Failure::input(format!("a {} file holds exactly one operator", self.kind)));
        }
        let d = sig.total_dim();
        for (i, m) in self.outcomes.iter().enumerate() {
            let m = decode_matrix(m)?;
            if m.rows() != d || m.cols() != d {
                return Err(Failure::input(format!("outcome {i} is {}x{}, signature needs {d}x{d}", m.rows(), m.cols())));
            }
        }
        Ok(())
    }

    /// Outcomes as Hermitian operators on the comb signature.
    pub fn to_gqi(&self, tol: &Tolerance) -> Result<Gqi> {
        let outcomes = self
            .outcomes
            .iter()
            .map(|m| Hermitian::with_tolerance(decode_matrix(m)?, tol).map_err(Failure::from))
            .collect::<Result<Vec<_>>>()?;
        Gqi::new(self.comb_signature()?, outcomes).map_err(Failure::from)
    }

    pub fn from_gqi(kind: Kind, g: &Gqi) -> Self {
        let signature = match kind {
            Kind::Povm => vec![g.dim()],
            _ => g.signature().dims().to_vec(),
        };
        OperatorFile {
            kind,
            signature,
            outcomes: g.outcomes().iter().map(|t| encode_matrix(t.matrix())).collect(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_label(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }
}

/// A validated object with its kind-specific view.
pub enum Object {
    Generic(Gqi),
    Tester(Tester),
    Channel(Channel),
    Instrument(Instrument),
    Povm(Povm),
}

impl Object {
    /// Builds the typed view; the GQI must already be valid.
    pub fn new(kind: Kind, g: Gqi, tol: &Tolerance) -> Result<Self> {
        let sig = g.signature().clone();
        Ok(match kind {
            Kind::Gqi | Kind::Comb => Object::Generic(g),
            Kind::Tester => Object::Tester(Tester::from_gqi(g)?),
            Kind::Channel => {
                let choi = g.into_outcomes().remove(0);
                Object::Channel(Channel::new(choi, sig.dims()[0], sig.dims()[1], tol)?)
            }
            Kind::Instrument => Object::Instrument(Instrument::from_gqi(&g, tol)?),
            Kind::Povm => Object::Povm(Povm::new(g.into_outcomes(), tol)?),
        })
    }
}
