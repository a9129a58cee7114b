//! Exact computation with meromorphic germs at zero whose poles lie on
//! linear hyperplanes: canonical polar decompositions relative to an inner
//! product, dependence spaces and locality, shuffle algebras of Chen and
//! Speer fractions, and renormalization evaluators.

pub mod evalgal;
pub mod exactlin;
pub mod fracmap;
pub mod germ;
pub mod mzv;
pub mod polynomial;
pub mod rational;
pub mod shuffle;
pub mod syntax;

pub use evalgal::{
    apply_transform, check_factorization, compose_transforms, ev_reg_single, galois_from_evaluator, generators_of,
    invert_transform, iter_eval, zeta_eval, Combo, ComboTerm, Correction, EvalValue, Evaluator, FactorizationReport,
    GaloisTransform, IterEvaluator, MsEvaluator, ZetaEvaluator,
};
pub use exactlin::{
    find_circuit, inner, is_independent, orth_decompose, orthogonal, span, Circuit, InnerProduct, LinearForm,
    Subspace, Var,
};
pub use fracmap::{
    combo_germ, expand_product, flatten_forest, forest_fraction, lyndon_decompose, phi, word_of_fraction, Forest,
    ForestNode, FractionSpec, LMap, LMapKind, SpecPolynomial,
};
pub use germ::{
    d_residue, decompose, dependence, germ_add, germ_mul, is_local_pair, locality_mul, ms_eval, p_residue,
    poly_dependence, project_plus, recompose, Decomposition, GermSum, PolarTerm, PoleFactor, RationalGerm,
    SimplexFraction,
};
pub use mzv::{mzv, mzv_numeric, mzv_uncached, Ball, MzvIndex};
pub use polynomial::{Monomial, Polynomial};
pub use rational::{parse_rational, rational_to_string, Rational};
pub use shuffle::{
    cfl, is_local_pair_words, is_local_word, is_lyndon, locality_cfl, locality_lyndon_generators, lyndon_rewrite,
    shuffle, Alphabet, Letter, LyndonPolynomial, Word, WordPolynomial,
};
pub use syntax::{parse_combo, parse_germ, parse_spec, parse_word, render_combo, render_germ};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid inner product: {0}")]
    InvalidInnerProduct(String),
    #[error("zero linear form in a denominator")]
    ZeroDenominator,
    #[error("denominator forms are linearly dependent")]
    DependentForms,
    #[error("not local: {0}")]
    NotLocal(String),
    #[error("empty word")]
    EmptyWord,
    #[error("word ends in x0")]
    WordEndsInX0,
    #[error("cumulative form {0} vanishes")]
    ZeroCumulativeForm(usize),
    #[error("fraction spec is not local: {0}")]
    NotLocalSpec(String),
    #[error("{got} variables exceed the permutation cap {cap}")]
    TooManyVariables { got: usize, cap: usize },
    #[error("germ depends on directions outside the evaluation variables")]
    DependenceEscapesVars,
    #[error("divergent index: first entry must be at least 2")]
    DivergentIndex,
    #[error("not a Chen fraction: {0}")]
    NotChen(String),
    #[error("evaluator undefined on {0}")]
    EvaluatorDomain(String),
    #[error("incompatible generators: {0}")]
    IncompatibleGenerators(String),
    #[error("invalid forest: {0}")]
    InvalidForest(String),
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("pole at {pos} is not homogeneous")]
    NonHomogeneousPole { pos: usize },
}

impl Error {
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::NonHomogeneousPole { .. })
    }
}
