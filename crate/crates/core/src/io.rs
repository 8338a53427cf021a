//! JSON interchange.
//!
//! Matrices are objects `{"dim": d, "entries": [[re, im], ...]}` in row-major
//! order; rectangular matrices use `{"rows": r, "cols": c, "entries": ...}`.
//! Floats are written with 17 significant digits so that printing and parsing
//! round-trips every double exactly.

use std::io::Write;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::ser::Formatter;

use crate::opcore::OperatorTuple;
use crate::{Error, Mat, Result, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MatrixJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    cols: Option<usize>,
    entries: Vec<[f64; 2]>,
}

fn to_json(m: &Mat) -> MatrixJson {
    let (r, c) = m.shape();
    let mut entries = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            let z = m[(i, j)];
            entries.push([z.re, z.im]);
        }
    }
    if r == c {
        MatrixJson {
            dim: Some(r),
            rows: None,
            cols: None,
            entries,
        }
    } else {
        MatrixJson {
            dim: None,
            rows: Some(r),
            cols: Some(c),
            entries,
        }
    }
}

fn from_json(j: MatrixJson) -> std::result::Result<Mat, String> {
    let (r, c) = match (j.dim, j.rows, j.cols) {
        (Some(d), None, None) => (d, d),
        (None, Some(r), Some(c)) => (r, c),
        (Some(d), Some(r), Some(c)) if r == d && c == d => (d, d),
        _ => return Err("matrix needs either `dim` or both `rows` and `cols`".into()),
    };
    if j.entries.len() != r * c {
        return Err(format!(
            "matrix of shape {r}x{c} needs {} entries, found {}",
            r * c,
            j.entries.len()
        ));
    }
    if j.entries.iter().any(|e| !e[0].is_finite() || !e[1].is_finite()) {
        return Err("non-finite matrix entry".into());
    }
    Ok(Mat::from_fn(r, c, |i, k| {
        let e = j.entries[i * c + k];
        C64::new(e[0], e[1])
    }))
}

/// `#[serde(with = "crate::io::mat")]` for a single matrix.
pub mod mat {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_json(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Mat, D::Error> {
        from_json(MatrixJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "crate::io::mat_vec")]` for a list of matrices.
pub mod mat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(m: &[Mat], s: S) -> std::result::Result<S::Ok, S::Error> {
        m.iter().map(to_json).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Mat>, D::Error> {
        Vec::<MatrixJson>::deserialize(d)?
            .into_iter()
            .map(|j| from_json(j).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// `#[serde(with = "crate::io::tuple")]` for an [`OperatorTuple`], written as its matrix list.
pub mod tuple {
    use super::*;

    pub fn serialize<S: Serializer>(t: &OperatorTuple, s: S) -> std::result::Result<S::Ok, S::Error> {
        super::mat_vec::serialize(t.ops(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<OperatorTuple, D::Error> {
        let ops = super::mat_vec::deserialize(d)?;
        OperatorTuple::new(ops).map_err(serde::de::Error::custom)
    }
}

/// Input and output document for operator tuples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleDocument {
    pub n: usize,
    pub dim: usize,
    #[serde(with = "mat_vec")]
    pub matrices: Vec<Mat>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metadata: Option<serde_json::Value>,
    /// Coordinates on which truncated-model identities hold exactly.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub interior: Option<Vec<usize>>,
}

impl TupleDocument {
    pub fn from_tuple(t: &OperatorTuple) -> Self {
        TupleDocument {
            n: t.arity(),
            dim: t.dim(),
            matrices: t.ops().to_vec(),
            metadata: None,
            interior: None,
        }
    }

    pub fn with_metadata(mut self, metadata: serde_json::Value) -> Self {
        self.metadata = Some(metadata);
        self
    }

    pub fn to_tuple(&self) -> Result<OperatorTuple> {
        if self.matrices.len() != self.n {
            return Err(Error::Parse(format!(
                "document declares n = {} but holds {} matrices",
                self.n,
                self.matrices.len()
            )));
        }
        let t = OperatorTuple::new(self.matrices.clone())?;
        if t.dim() != self.dim {
            return Err(Error::Parse(format!(
                "document declares dim = {} but matrices are {}x{}",
                self.dim,
                t.dim(),
                t.dim()
            )));
        }
        Ok(t)
    }
}

/// Writes every float as `{:.16e}`: 17 significant digits, exact round-trip.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactFloatFormatter;

impl Formatter for ExactFloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes with [`ExactFloatFormatter`] in compact form.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloatFormatter);
    value.serialize(&mut ser)?;
    String::from_utf8(out).map_err(|e| Error::Io(e.to_string()))
}

pub fn from_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    Ok(serde_json::from_str(s)?)
}

pub fn read_file<T: DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    from_str(&std::fs::read_to_string(path)?)
}

pub fn write_file<T: Serialize + ?Sized>(path: &std::path::Path, value: &T) -> Result<()> {
    let mut s = to_string(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    #[test]
    fn matrix_json_shape() {
        let m = Mat::from_row_slice(1, 1, &[c(0.25, -1.0)]);
        let doc = TupleDocument::from_tuple(&OperatorTuple::new(vec![m.clone(), m]).unwrap());
        let s = to_string(&doc).unwrap();
        assert_eq!(
            s,
            r#"{"n":2,"dim":1,"matrices":[{"dim":1,"entries":[[2.5000000000000000e-1,-1.0000000000000000e0]]},{"dim":1,"entries":[[2.5000000000000000e-1,-1.0000000000000000e0]]}]}"#
        );
        let back: TupleDocument = from_str(&s).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn rectangular_round_trip() {
        #[derive(Serialize, Deserialize)]
        struct W {
            #[serde(with = "mat")]
            m: Mat,
        }
        let m = Mat::from_fn(2, 3, |i, j| c(i as f64 / 3.0, -(j as f64) / 7.0));
        let s = to_string(&W { m: m.clone() }).unwrap();
        assert!(s.contains("\"rows\":2"));
        let back: W = from_str(&s).unwrap();
        assert_eq!(back.m, m);
    }

    #[test]
    fn bad_documents() {
        let short = r#"{"n":2,"dim":1,"matrices":[{"dim":1,"entries":[]}]}"#;
        assert!(from_str::<TupleDocument>(short).is_err());
        let count = r#"{"n":3,"dim":1,"matrices":[{"dim":1,"entries":[[1,0]]},{"dim":1,"entries":[[1,0]]}]}"#;
        let doc: TupleDocument = from_str(count).unwrap();
        assert!(matches!(doc.to_tuple(), Err(Error::Parse(_))));
    }
}
