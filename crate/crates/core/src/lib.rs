pub mod alias;
pub mod approx;
pub mod error;
pub mod expected;
pub mod geom;
pub mod interval;
pub mod ops;
pub mod oracle;
pub mod rng;
pub mod shallow;
pub mod stats;
pub mod types;
pub mod weight_partition;
pub mod workload;

pub use alias::AliasTable;
pub use error::{Error, Result};
pub use expected::{ExpectedSampler, QueryStats, SamplerConfig};
pub use rng::{CountingSource, RandomSource, SeededRng};
pub use types::{Dataset, WeightedPoint};
