//! JSON kernel specifications: `{"kind": ..., "params": {...}}`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    chform_kernel, constant_kernel, lemma18_kernel, random_separable_terms, restrict_kernel, separable_kernel,
    FormTerm, Kernel, Lemma18Info, SeparableTerm, SphereForm,
};
use crate::error::{Error, Result};
use crate::geometry::{PolytopeSpec, Vector};

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SeparableParams {
    pub n: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<SeparableTerm>>,
    /// Draw constant and terms from this seed instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum FormSpec {
    Invariant {
        #[serde(default = "one")]
        scale: f64,
    },
    Random { seed: u64, degree: u32 },
    Terms { terms: Vec<FormTerm> },
}

impl FormSpec {
    pub fn build(&self) -> Result<SphereForm> {
        match self {
            FormSpec::Invariant { scale } => Ok(SphereForm::invariant().scaled(*scale)),
            FormSpec::Random { seed, degree } => {
                if *degree != 1 && *degree != 3 {
                    return Err(Error::InvalidParameter(format!("random form degree {degree} (use 1 or 3)")));
                }
                Ok(SphereForm::random_odd(&mut ChaCha8Rng::seed_from_u64(*seed), *degree))
            }
            FormSpec::Terms { terms } => Ok(SphereForm { terms: terms.clone() }),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum KernelSpec {
    Constant {
        n: usize,
        k: usize,
        #[serde(default = "one")]
        value: f64,
    },
    Separable(SeparableParams),
    Lemma18 {
        polytope: PolytopeSpec,
        /// The two endpoints of the chosen edge, as coordinates.
        edge: [Vec<f64>; 2],
        bump_width: f64,
    },
    Chform(FormSpec),
    /// Restriction of a kernel on G_1(R^n) to the 3-space spanned by `w`,
    /// as a kernel on R^3 in the orthonormalized coordinates of `w`.
    Restricted {
        inner: Box<KernelSpec>,
        w: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<f64>,
    },
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel> {
        Ok(self.build_with_info()?.0)
    }

    /// The kernel and, for the Ker S construction, its predicted data.
    pub fn build_with_info(&self) -> Result<(Kernel, Option<Lemma18Info>)> {
        match self {
            KernelSpec::Constant { n, k, value } => Ok((constant_kernel(*n, *k, *value)?, None)),
            KernelSpec::Separable(sp) => {
                let (c, terms) = match (&sp.random_seed, &sp.terms) {
                    (Some(seed), None) => random_separable_terms(&mut ChaCha8Rng::seed_from_u64(*seed), sp.n),
                    (None, terms) => (sp.constant.unwrap_or(0.0), terms.clone().unwrap_or_default()),
                    (Some(_), Some(_)) => {
                        return Err(Error::InvalidParameter("give either terms or random_seed".into()))
                    }
                };
                Ok((separable_kernel(sp.n, sp.k, c, &terms)?, None))
            }
            KernelSpec::Lemma18 { polytope, edge, bump_width } => {
                let p = polytope.build()?;
                let ids = [p.vertex_index(&edge[0])?, p.vertex_index(&edge[1])?];
                let (k, info) = lemma18_kernel(&p, ids, *bump_width)?;
                Ok((k, Some(info)))
            }
            KernelSpec::Chform(fs) => Ok((chform_kernel(&fs.build()?)?, None)),
            KernelSpec::Restricted { inner, w, kappa } => {
                let f = inner.build()?;
                let w: Vec<Vector> = w.iter().map(|v| DVector::from_column_slice(v)).collect();
                Ok((restrict_kernel(&f, &w, *kappa)?.kernel().clone(), None))
            }
        }
    }
}
