//! Fixtures shared by the benchmarks.

use agmstl::formula::parse;
use agmstl::synthesis::SynthesisProblem;
use agmstl::{ChannelRange, Formula, ModelKind, Semantics, SystemModel, Trace};

/// Two-channel trace of `len` samples with smooth, deterministic values in `[-1, 1]`.
pub fn wave_trace(len: usize) -> Trace {
    let rows = (0..len)
        .map(|k| {
            let t = k as f64 * 0.37;
            vec![0.9 * t.sin(), 0.8 * (1.3 * t).cos()]
        })
        .collect();
    Trace::new(vec!["x".into(), "y".into()], rows).unwrap()
}

/// A reach-avoid style formula whose horizon grows with `window`.
pub fn reach_avoid(window: usize) -> Formula {
    let w = window.max(2);
    parse(&format!(
        "F[1,{w}] (x > 0.2 && x < 0.6 && y > -0.3 && y < 0.3) && G[0,{w}] !(x > -0.2 && x < 0.1 && y > 0.4)"
    ))
    .unwrap()
}

pub fn planar_problem(semantics: Semantics) -> SynthesisProblem {
    let r = |a, b| ChannelRange::new(a, b).unwrap();
    let model = SystemModel::with_all_outputs(
        ModelKind::PlanarIntegrator,
        vec![0.0, 1.0],
        vec![r(0.0, 6.0), r(0.0, 6.0)],
        vec![r(-1.5, 1.5), r(-1.5, 1.5)],
    )
    .unwrap();
    let spec = parse(
        "F[1,5] (x > -0.667 && x < -0.333 && y > 0 && y < 0.333) && F[6,10] (x > 0 && x < 0.333 && y > -0.667 && y < -0.333)",
    )
    .unwrap();
    SynthesisProblem::new(model, spec, 10, 0.0, semantics).unwrap()
}
