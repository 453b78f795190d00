use super::{NamedFeatures, PooledSample};

/// Sample shape and ranges. The block/cell counts describe the trivial
/// single-cell grid and are constant.
pub fn basic_features(sample: &PooledSample) -> NamedFeatures {
    let d = sample.dimension;
    let n = sample.len();
    let mut lower = vec![f64::INFINITY; d];
    let mut upper = vec![f64::NEG_INFINITY; d];
    for i in 0..n {
        for (j, &v) in sample.row(i).iter().enumerate() {
            lower[j] = lower[j].min(v);
            upper[j] = upper[j].max(v);
        }
    }
    let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
    let y_min = fold(&sample.fitness, f64::min, f64::INFINITY);
    let y_max = fold(&sample.fitness, f64::max, f64::NEG_INFINITY);
    let blocks = 1.0;
    vec![
        ("basic.dim".into(), d as f64),
        ("basic.observations".into(), n as f64),
        ("basic.lower_min".into(), fold(&lower, f64::min, f64::INFINITY)),
        ("basic.lower_max".into(), fold(&lower, f64::max, f64::NEG_INFINITY)),
        ("basic.upper_min".into(), fold(&upper, f64::min, f64::INFINITY)),
        ("basic.upper_max".into(), fold(&upper, f64::max, f64::NEG_INFINITY)),
        ("basic.objective_min".into(), y_min),
        ("basic.objective_max".into(), y_max),
        ("basic.blocks_min".into(), blocks),
        ("basic.blocks_max".into(), blocks),
        ("basic.cells_total".into(), blocks.powi(d as i32)),
        ("basic.cells_filled".into(), if n > 0 { 1.0 } else { 0.0 }),
    ]
}
