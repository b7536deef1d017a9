//! JSON files. Field elements are written as their integer encodings.

use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{Monomial, MultilinearForm, PolynomialFn};
use crate::gfq::{FieldCtx, FieldDescriptor};
use crate::linalg::Matrix;
use crate::pencils::Pencil;

/// `{"field": {"p", "e"}, "dims": [...], "coeffs": [...]}`, row-major with the
/// last index fastest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorFile {
    pub field: FieldDescriptor,
    pub dims: Vec<usize>,
    pub coeffs: Vec<u64>,
}

impl TensorFile {
    pub fn to_form(&self) -> Result<MultilinearForm> {
        let field = FieldCtx::from_descriptor(self.field)?;
        MultilinearForm::from_indices(&field, self.dims.clone(), &self.coeffs)
    }

    pub fn from_form(p: &MultilinearForm) -> Self {
        Self {
            field: p.field().descriptor(),
            dims: p.dims().to_vec(),
            coeffs: p.indices(),
        }
    }
}

/// `{"field", "rows", "cols", "A": [...], "B": [...]}`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PencilFile {
    pub field: FieldDescriptor,
    pub rows: usize,
    pub cols: usize,
    #[serde(rename = "A")]
    pub a: Vec<u64>,
    #[serde(rename = "B")]
    pub b: Vec<u64>,
}

impl PencilFile {
    pub fn to_pencil(&self) -> Result<Pencil> {
        let field = FieldCtx::from_descriptor(self.field)?;
        Pencil::new(
            Matrix::from_indices(&field, self.rows, self.cols, &self.a)?,
            Matrix::from_indices(&field, self.rows, self.cols, &self.b)?,
        )
    }

    pub fn from_pencil(p: &Pencil) -> Self {
        Self {
            field: p.field().descriptor(),
            rows: p.shape().0,
            cols: p.shape().1,
            a: p.a().indices(),
            b: p.b().indices(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermFile {
    pub exps: Vec<u32>,
    pub coeff: u64,
}

/// `{"field": {"p", "e": 1}, "n", "terms": [{"exps", "coeff"}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyFile {
    pub field: FieldDescriptor,
    pub n: usize,
    pub terms: Vec<TermFile>,
}

impl PolyFile {
    pub fn to_poly(&self) -> Result<PolynomialFn> {
        let field = FieldCtx::from_descriptor(self.field)?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(Monomial {
                    exps: t.exps.clone(),
                    coeff: field.elem(t.coeff)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PolynomialFn::new(&field, self.n, terms)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
