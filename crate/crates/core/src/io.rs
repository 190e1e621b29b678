//! JSON documents for kernels and measures.
//!
//! A single schema covers both: `{"m": int, "entries": [[...]], "weights": [...]}`.
//! A kernel document omits `weights`; a measure document omits `entries`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::measure::Measure;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl Document {
    pub fn from_kernel(kernel: &KernelMatrix) -> Self {
        Self {
            m: kernel.size(),
            entries: Some(kernel.rows()),
            weights: None,
        }
    }

    pub fn from_measure(mu: &Measure) -> Self {
        Self {
            m: mu.len(),
            entries: None,
            weights: Some(mu.weights().to_vec()),
        }
    }

    pub fn with_measure(mut self, mu: &Measure) -> Result<Self> {
        mu.check_len(self.m)?;
        self.weights = Some(mu.weights().to_vec());
        Ok(self)
    }

    pub fn kernel(&self) -> Result<KernelMatrix> {
        let rows = self
            .entries
            .as_ref()
            .ok_or_else(|| Error::InvalidInstance("document has no \"entries\"".into()))?;
        if rows.len() != self.m {
            return Err(Error::SizeMismatch {
                expected: self.m,
                found: rows.len(),
            });
        }
        KernelMatrix::from_rows(rows)
    }

    pub fn measure(&self) -> Result<Measure> {
        let w = self
            .weights
            .as_ref()
            .ok_or_else(|| Error::InvalidInstance("document has no \"weights\"".into()))?;
        if w.len() != self.m {
            return Err(Error::SizeMismatch {
                expected: self.m,
                found: w.len(),
            });
        }
        Ok(Measure::new(w.clone()))
    }

    pub fn read<R: Read>(reader: R) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(std::fs::File::open(path)?)
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}
