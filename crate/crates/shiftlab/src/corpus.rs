//! The shipped scenario corpus, compiled into the library so that the CLI,
//! the C bindings, and the integration tests all run the same bytes.

use crate::error::Result;
use crate::report::AnalysisReport;
use crate::runner::{run_scenario, RunOptions};
use crate::scenario::{parse_scenario, resolve};

pub const SHIPPED: &[(&str, &str)] = &[
    (
        "example_3_5_algebraic",
        include_str!("../../../scenarios/example_3_5_algebraic.toml"),
    ),
    (
        "example_4_4_weighted_shift",
        include_str!("../../../scenarios/example_4_4_weighted_shift.toml"),
    ),
    (
        "prop_4_6_moments",
        include_str!("../../../scenarios/prop_4_6_moments.toml"),
    ),
    ("jordan_gh", include_str!("../../../scenarios/jordan_gh.toml")),
    (
        "volterra_cyclicity",
        include_str!("../../../scenarios/volterra_cyclicity.toml"),
    ),
    (
        "theorem_d_combinations",
        include_str!("../../../scenarios/theorem_d_combinations.toml"),
    ),
];

pub fn find(name: &str) -> Option<&'static str> {
    SHIPPED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, source)| *source)
}

/// Runs scenario source text that needs no file-system context (shipped
/// scenarios never reference vector files).
pub fn run_source(source: &str, opts: &RunOptions) -> Result<AnalysisReport> {
    let file = parse_scenario(source)?;
    let scenario = resolve(file, source.to_string(), opts.contract, None)?;
    run_scenario(&scenario, opts)
}
