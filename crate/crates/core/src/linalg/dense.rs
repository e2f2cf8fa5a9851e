use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::{hermitian_defect, CMat, HERMITIAN_RTOL};
use crate::error::{Error, Result};

/// Scalar field of a matrix or vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// `Real` iff every imaginary part is exactly zero.
    pub fn of(m: &CMat) -> Self {
        if m.iter().all(|z| z.im == 0.0) {
            Field::Real
        } else {
            Field::Complex
        }
    }

    pub fn join(self, other: Field) -> Field {
        if self == Field::Real && other == Field::Real {
            Field::Real
        } else {
            Field::Complex
        }
    }

    /// Real dimension of the scalar field (1 for R, 2 for C).
    pub fn alpha(self) -> usize {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
        }
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r" | "real" => Ok(Field::Real),
            "c" | "complex" => Ok(Field::Complex),
            other => Err(Error::Invalid(format!("unknown field `{other}`"))),
        }
    }
}

/// A dense matrix with its field tag and a Hermitian flag.
///
/// The flag is computed on construction and is advisory: routines that need a
/// Hermitian argument still check it themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    data: CMat,
    field: Field,
    hermitian: bool,
}

impl DenseMatrix {
    pub fn new(data: CMat) -> Self {
        let field = Field::of(&data);
        let hermitian = data.is_square() && hermitian_defect(&data) <= HERMITIAN_RTOL;
        DenseMatrix { data, field, hermitian }
    }

    /// Wraps `data` under an explicit field. A real tag on data with nonzero
    /// imaginary parts is rejected.
    pub fn with_field(data: CMat, field: Field) -> Result<Self> {
        let mut m = DenseMatrix::new(data);
        if field == Field::Real && m.field == Field::Complex {
            return Err(Error::Invalid("real field tag on complex data".into()));
        }
        m.field = field;
        Ok(m)
    }

    pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> Self {
        DenseMatrix::new(super::from_real(rows, cols, data))
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix::new(CMat::identity(n, n))
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.data
    }

    pub fn into_matrix(self) -> CMat {
        self.data
    }

    pub fn require_hermitian(&self) -> Result<()> {
        if !self.data.is_square() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                self.data.nrows(),
                self.data.ncols()
            )));
        }
        if self.hermitian {
            Ok(())
        } else {
            Err(Error::NotHermitian(hermitian_defect(&self.data)))
        }
    }
}

impl Deref for DenseMatrix {
    type Target = CMat;

    fn deref(&self) -> &CMat {
        &self.data
    }
}

impl From<CMat> for DenseMatrix {
    fn from(data: CMat) -> Self {
        DenseMatrix::new(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use nalgebra::Complex;

    #[test]
    fn field_detection() {
        let mut m = CMat::identity(3, 3);
        assert_eq!(Field::of(&m), Field::Real);
        m[(0, 1)] = Complex::new(0.0, 1e-300);
        assert_eq!(Field::of(&m), Field::Complex);
    }

    #[test]
    fn hermitian_flag() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = Complex::new(1.0, 2.0);
        m[(1, 0)] = Complex::new(1.0, -2.0);
        let d = DenseMatrix::new(m.clone());
        assert!(d.is_hermitian());
        assert_eq!(d.field(), Field::Complex);
        m[(1, 0)] = re(1.0);
        assert!(DenseMatrix::new(m).require_hermitian().is_err());
    }

    #[test]
    fn real_tag_on_complex_data_rejected() {
        let mut m = CMat::identity(2, 2);
        m[(0, 0)] = Complex::new(1.0, 1.0);
        assert!(DenseMatrix::with_field(m.clone(), Field::Real).is_err());
        assert!(DenseMatrix::with_field(m, Field::Complex).is_ok());
        let r = DenseMatrix::with_field(CMat::identity(2, 2), Field::Complex).unwrap();
        assert_eq!(r.field(), Field::Complex);
    }
}
