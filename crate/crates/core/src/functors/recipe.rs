use serde::{Deserialize, Serialize};

use super::su21::{build_su21_rep, Complex3};
use super::{direct_sum_generators, perturb_generators, sym_square, tau_d, wedge_power};
use crate::error::{Error, Result};
use crate::groups::GeneratorSet;
use crate::linalg::MatrixD;

/// Base generator matrices of a recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    /// Real square matrices, row-major.
    Real { generators: Vec<Vec<Vec<f64>>> },
    /// Complex `3×3` matrices in `SU(2,1)`, entries as `[re, im]`, sent
    /// through the 9-dimensional construction.
    Su21 { generators: Vec<Complex3> },
}

/// One step of a functor chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functor {
    Tau {
        d: usize,
    },
    Wedge {
        k: usize,
    },
    Sym2,
    /// Applies each sub-chain to the current representation and sums the
    /// results block-diagonally, in order.
    DirectSum {
        parts: Vec<Vec<Functor>>,
    },
    Perturb {
        eps: f64,
        seed: u64,
    },
}

/// A replayable description of a representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub base: Base,
    #[serde(default)]
    pub chain: Vec<Functor>,
}

/// A representation given by its symmetric generator set and the recipe
/// that produced it. Rebuilding from the recipe reproduces the generators.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    gens: GeneratorSet,
    recipe: Recipe,
}

impl Base {
    fn build(&self) -> Result<GeneratorSet> {
        match self {
            Base::Real { generators } => {
                let mats = generators.iter().map(|rows| MatrixD::from_rows(rows)).collect::<Result<Vec<_>>>()?;
                GeneratorSet::new(mats)
            }
            Base::Su21 { generators } => {
                let mats = generators.iter().map(build_su21_rep).collect::<Result<Vec<_>>>()?;
                GeneratorSet::new(mats)
            }
        }
    }
}

fn apply_functor(gens: &GeneratorSet, f: &Functor) -> Result<GeneratorSet> {
    match f {
        Functor::Tau { d } => gens.map(|g| tau_d(g, *d)),
        Functor::Wedge { k } => gens.map(|g| wedge_power(g, *k)),
        Functor::Sym2 => gens.map(sym_square),
        Functor::DirectSum { parts } => {
            let mut pieces = parts.iter().map(|chain| apply_chain(gens, chain));
            let Some(first) = pieces.next() else {
                return Err(Error::InvalidArgument("direct sum of no parts".into()));
            };
            pieces.try_fold(first?, |acc, next| direct_sum_generators(&acc, &next?))
        }
        Functor::Perturb { eps, seed } => perturb_generators(gens, *eps, *seed),
    }
}

fn apply_chain(gens: &GeneratorSet, chain: &[Functor]) -> Result<GeneratorSet> {
    chain.iter().try_fold(gens.clone(), |acc, f| apply_functor(&acc, f))
}

impl Recipe {
    pub fn build(&self) -> Result<Representation> {
        let gens = apply_chain(&self.base.build()?, &self.chain)?;
        Ok(Representation { gens, recipe: self.clone() })
    }
}

impl Representation {
    pub fn from_recipe(recipe: &Recipe) -> Result<Self> {
        recipe.build()
    }

    /// A representation with the given forward generators and a real base
    /// recipe holding exactly these matrices.
    pub fn from_generators(generators: Vec<MatrixD>) -> Result<Self> {
        let recipe = Recipe {
            base: Base::Real { generators: generators.iter().map(|g| g.to_rows()).collect() },
            chain: Vec::new(),
        };
        Ok(Self { gens: GeneratorSet::new(generators)?, recipe })
    }

    pub fn dim(&self) -> usize {
        self.gens.dim()
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn recipe(&self) -> &Recipe {
        &self.recipe
    }

    /// Applies one more functor, extending the recipe.
    pub fn apply(&self, f: &Functor) -> Result<Representation> {
        let gens = apply_functor(&self.gens, f)?;
        let mut recipe = self.recipe.clone();
        recipe.chain.push(f.clone());
        Ok(Representation { gens, recipe })
    }

    /// Block-diagonal sum. When both recipes share a base the result is
    /// recorded as a direct-sum step; otherwise the summed matrices become
    /// a new real base.
    pub fn direct_sum(a: &Representation, b: &Representation) -> Result<Representation> {
        let gens = direct_sum_generators(&a.gens, &b.gens)?;
        let recipe = if a.recipe.base == b.recipe.base {
            Recipe {
                base: a.recipe.base.clone(),
                chain: vec![Functor::DirectSum { parts: vec![a.recipe.chain.clone(), b.recipe.chain.clone()] }],
            }
        } else {
            Recipe {
                base: Base::Real { generators: gens.generators().iter().map(|g| g.to_rows()).collect() },
                chain: Vec::new(),
            }
        };
        Ok(Representation { gens, recipe })
    }
}
