//! JSON shapes for complex data: scalars as `{re, im}`, matrices as
//! row-major nested lists of those pairs.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexRecord {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexRecord {
    fn from(z: C64) -> Self {
        ComplexRecord { re: z.re, im: z.im }
    }
}

impl From<ComplexRecord> for C64 {
    fn from(r: ComplexRecord) -> Self {
        C64::new(r.re, r.im)
    }
}

pub fn vec_to_records(v: &[C64]) -> Vec<ComplexRecord> {
    v.iter().copied().map(ComplexRecord::from).collect()
}

pub fn records_to_vec(v: &[ComplexRecord]) -> Vec<C64> {
    v.iter().copied().map(C64::from).collect()
}

pub fn matrix_to_records(m: &DMatrix<C64>) -> Vec<Vec<ComplexRecord>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
        .collect()
}

pub fn records_to_matrix(rows: &[Vec<ComplexRecord>]) -> Option<DMatrix<C64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j].into()))
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        ComplexRecord::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        ComplexRecord::deserialize(d).map(C64::from)
    }
}

pub mod cvec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        vec_to_records(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Vec::<ComplexRecord>::deserialize(d).map(|v| records_to_vec(&v))
    }
}

pub mod cvec_opt {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Vec<C64>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_deref().map(vec_to_records).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<C64>>, D::Error> {
        Option::<Vec<ComplexRecord>>::deserialize(d).map(|v| v.map(|v| records_to_vec(&v)))
    }
}

pub mod cvec_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<C64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| vec_to_records(x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<C64>>, D::Error> {
        Vec::<Vec<ComplexRecord>>::deserialize(d).map(|v| v.iter().map(|x| records_to_vec(x)).collect())
    }
}

pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<C64>, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_records(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<C64>, D::Error> {
        let rows = Vec::<Vec<ComplexRecord>>::deserialize(d)?;
        records_to_matrix(&rows).ok_or_else(|| serde::de::Error::custom("ragged matrix rows"))
    }
}

pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[DMatrix<C64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(matrix_to_records).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DMatrix<C64>>, D::Error> {
        let all = Vec::<Vec<Vec<ComplexRecord>>>::deserialize(d)?;
        all.iter()
            .map(|rows| records_to_matrix(rows).ok_or_else(|| serde::de::Error::custom("ragged matrix rows")))
            .collect()
    }
}
