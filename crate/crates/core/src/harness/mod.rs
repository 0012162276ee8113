//! Configuration, standard corpus, invariant suite, reports, the Gaussian demo
//! and single evaluations of the calculus.

pub mod calc;
mod checks;
pub mod config;
pub mod corpus;
pub mod demo;
pub mod report;
pub mod suite;

pub use calc::{run_calc, write_calc, CalcSummary};
pub use config::{CalcConfig, CorpusSelection, DemoConfig, GridConfig, SpaceConfig, SuiteConfig};
pub use corpus::Corpus;
pub use demo::{run_gaussian_demo, DemoSummary};
pub use report::{write_report, Summary};
pub use suite::{run_suite, CheckResult, CheckSpec, Comparison, Status, SuiteReport, CHECKS};
