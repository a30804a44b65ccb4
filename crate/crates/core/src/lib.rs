//! Metamorphic testing of a simplified federal income-tax engine.

pub mod engine;
pub mod generator;
pub mod money;
pub mod params;
pub mod record;
pub mod relation;
pub mod report;
pub mod suite;
pub mod tree;

pub use engine::{Engine, MutantId, Sut, SutError};
pub use generator::{run_relation, run_relations, GeneratorConfig, Label, RunResult, Verdict};
pub use money::Money;
pub use params::TaxParams;
pub use record::{Field, FilingStatus, TaxReturnInput};
pub use relation::{catalog, relation, MetamorphicRelation};
pub use report::RunSummary;
pub use suite::Suite;
pub use tree::{fit, FeatureFrame, LexTree, TreeParams};
