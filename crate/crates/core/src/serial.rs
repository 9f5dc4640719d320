//! Serde helpers for complex coordinates, written as `[re, im]` pairs.

use num_complex::Complex;
use serde::ser::SerializeSeq;
use serde::Serializer;

pub(crate) fn cvec<S: Serializer>(v: &[Complex<f64>], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

pub(crate) fn cvecs<S: Serializer>(v: &[Vec<Complex<f64>>], s: S) -> Result<S::Ok, S::Error> {
    struct Row<'a>(&'a [Complex<f64>]);
    impl serde::Serialize for Row<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            cvec(self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for row in v {
        seq.serialize_element(&Row(row))?;
    }
    seq.end()
}
