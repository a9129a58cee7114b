//! Shared fixtures for the criterion benchmarks.

use linpole_core::fracmap::FractionSpec;
use linpole_core::germ::RationalGerm;
use linpole_core::parse_germ;

/// Germs of growing size for the decomposition kernel.
pub fn decomposition_inputs() -> Vec<(&'static str, RationalGerm)> {
    [
        ("chen2", "1/(z1*(z1+z2))"),
        ("dep_example", "1/(z1*(z1+z2)) + 1/(z2*(z1+z2)) - 2/(z1*(z1+2*z2)) - 1/(z2*(z1+2*z2)) + 1/z3"),
        ("three_forms", "(z1 + z3)^2/(z1^2*(z1+z2)*(z2-z3)^2)"),
        ("four_vars", "z4/((z1+z2)*(z2+z3)*(z1+z3)*(z1+z2+z3+z4))"),
    ]
    .into_iter()
    .map(|(name, text)| (name, parse_germ(text).expect("fixture parses")))
    .collect()
}

/// Pairs of local Chen specs with `depth` letters each.
pub fn chen_pair(depth: u32, exp: u32) -> (FractionSpec, FractionSpec) {
    let exps = vec![exp; depth as usize];
    let a: Vec<u32> = (1..=depth).collect();
    let b: Vec<u32> = (depth + 1..=2 * depth).collect();
    (FractionSpec::chen(&exps, &a), FractionSpec::chen(&exps, &b))
}
