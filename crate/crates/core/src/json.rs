// SPDX-License-Identifier: Apache-2.0

//! JSON channel document.
//!
//! ```json
//! { "d_in": 2, "d_out": 2, "phi0": 0.0,
//!   "kraus": [ {"re": [[..]], "im": [[..]]}, ... ],
//!   "generator": {"re": [[..]], "im": [[..]]} }
//! ```
//!
//! Exactly one of `generator` or `kraus_dot` must be present. With a
//! generator the Kraus list is the φ-independent noise and the family is
//! `Kᵢ·exp(iGφ)`.

use serde::{Deserialize, Serialize};

use crate::channel::{phase_encoded_parts, Channel};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec};

/// Row-major matrix as separate real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMat) -> Self {
        let rows = |f: fn(&crate::linalg::C64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let rows = self.re.len();
        if self.im.len() != rows {
            return Err(Error::Parse("re/im row counts differ".into()));
        }
        let cols = self.re.first().map_or(0, Vec::len);
        if self
            .re
            .iter()
            .chain(&self.im)
            .any(|row| row.len() != cols)
        {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        Ok(CMat::from_fn(rows, cols, |i, j| c(self.re[i][j], self.im[i][j])))
    }
}

/// Complex vector as separate real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorDoc {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl VectorDoc {
    pub fn from_vector(v: &CVec) -> Self {
        Self {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_vector(&self) -> Result<CVec> {
        if self.re.len() != self.im.len() {
            return Err(Error::Parse("re/im lengths differ".into()));
        }
        Ok(CVec::from_iterator(
            self.re.len(),
            self.re.iter().zip(&self.im).map(|(&r, &i)| c(r, i)),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDoc {
    pub d_in: usize,
    pub d_out: usize,
    #[serde(default)]
    pub phi0: f64,
    pub kraus: Vec<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus_dot: Option<Vec<MatrixDoc>>,
}

impl ChannelDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: ChannelDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("channel JSON: {e}")))?;
        doc.check_schema()?;
        Ok(doc)
    }

    /// Structural rules serde cannot express.
    pub fn check_schema(&self) -> Result<()> {
        match (&self.generator, &self.kraus_dot) {
            (Some(_), Some(_)) => Err(Error::Parse(
                "give exactly one of \"generator\" or \"kraus_dot\", not both".into(),
            )),
            (None, None) => Err(Error::Parse(
                "missing \"generator\" or \"kraus_dot\"".into(),
            )),
            _ => Ok(()),
        }?;
        if self.kraus.is_empty() {
            return Err(Error::Parse("\"kraus\" is empty".into()));
        }
        Ok(())
    }

    /// Channel with shape checks only; run [`Channel::validate`] for the rest.
    pub fn to_channel_unchecked(&self) -> Result<Channel> {
        self.check_schema()?;
        let kraus = self
            .kraus
            .iter()
            .map(MatrixDoc::to_matrix)
            .collect::<Result<Vec<_>>>()?;
        for k in &kraus {
            if k.shape() != (self.d_out, self.d_in) {
                return Err(Error::Input(format!(
                    "Kraus operator of shape {:?}, declared {}x{}",
                    k.shape(),
                    self.d_out,
                    self.d_in
                )));
            }
        }
        let (kraus, kraus_dot) = match (&self.generator, &self.kraus_dot) {
            (Some(g), None) => phase_encoded_parts(&kraus, &g.to_matrix()?, self.phi0)?,
            (None, Some(kd)) => (
                kraus,
                kd.iter()
                    .map(MatrixDoc::to_matrix)
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => unreachable!("schema checked above"),
        };
        Channel::from_parts(kraus, kraus_dot, self.phi0)
    }

    /// Fully validated channel.
    pub fn to_channel(&self) -> Result<Channel> {
        let ch = self.to_channel_unchecked()?;
        ch.ensure_valid(&Default::default())?;
        Ok(ch)
    }

    /// Document carrying explicit derivatives.
    pub fn from_channel(ch: &Channel) -> Self {
        Self {
            d_in: ch.d_in(),
            d_out: ch.d_out(),
            phi0: ch.phi0(),
            kraus: ch.kraus().iter().map(MatrixDoc::from_matrix).collect(),
            generator: None,
            kraus_dot: Some(ch.kraus_dot().iter().map(MatrixDoc::from_matrix).collect()),
        }
    }
}
