//! Signal Temporal Logic monitoring and robustness-driven control synthesis.
//!
//! * [`formula`]: bounded STL syntax, parser and horizon.
//! * [`signal`]: multi-channel traces and normalization onto `[-1, 1]`.
//! * [`robustness`]: traditional, smooth and arithmetic-geometric-mean (AGM) scores.
//! * [`logic_algebra`]: the scalar AGM connectives.
//! * [`dynamics`]: discrete-time models and rollouts.
//! * [`synthesis`]: projected gradient ascent on robustness.
//! * [`disturbance`]: Monte-Carlo failure rates under input noise.
//!
//! ```
//! use agmstl::formula::parse;
//! use agmstl::robustness::{agm, traditional};
//! use agmstl::signal::Trace;
//!
//! let phi = parse("F[1,3] x > 0.5").unwrap();
//! let s = Trace::from_samples("x", &[0.0, 0.6, 0.8, 0.2]);
//! assert!((traditional(&phi, &s, 0).unwrap().score - 0.3).abs() < 1e-12);
//! assert!(agm(&phi, &s, 0).unwrap().score > 0.0);
//! ```

pub mod disturbance;
pub mod dynamics;
pub mod error;
pub mod formula;
pub mod logic_algebra;
pub mod robustness;
pub mod signal;
pub mod synthesis;

pub use dynamics::{ModelKind, OutputChannel, SystemModel, Trajectory};
pub use error::{Error, ParseError, Result};
pub use formula::{Formula, Predicate, Region, RegionTable};
pub use robustness::{PredicateScale, Semantics, SmoothConfig, Status, Verdict};
pub use signal::{ChannelRange, NormalizationMap, Trace};
pub use synthesis::{OptimizerConfig, SynthesisProblem, SynthesisResult};
