use super::SimilarityProfile;
use crate::error::{Error, Result};
use crate::meshfield::MeshField;

const SUBSAMPLES: usize = 8;

/// Samples `(eta, v)` with `v = (1+u)/(t_c-t)^{1/3}` and
/// `eta = (x-x_c)/(eps^{1/2} (t_c-t)^{1/4})`, at the nodes and
/// `SUBSAMPLES - 1` interior points per interval.
pub fn rescale_snapshot(
    field: &MeshField,
    t: f64,
    t_c: f64,
    x_c: f64,
    epsilon: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(t < t_c) {
        return Err(Error::InvalidTime { t, t_c });
    }
    let tau = t_c - t;
    let vs = tau.cbrt();
    let xs = epsilon.sqrt() * tau.powf(0.25);
    let nodes = field.mesh().nodes();
    let mut out = Vec::with_capacity(nodes.len() * SUBSAMPLES);
    for i in 0..nodes.len() - 1 {
        let h = nodes[i + 1] - nodes[i];
        for k in 0..SUBSAMPLES {
            let s = k as f64 / SUBSAMPLES as f64;
            let gap = 1.0 + field.eval_in_interval(i, s, 0);
            if !(gap > 0.0) {
                return Err(Error::TouchdownReached { node: i, gap });
            }
            out.push(((nodes[i] + s * h - x_c) / xs, gap / vs));
        }
    }
    let last = nodes.len() - 1;
    out.push((
        (nodes[last] - x_c) / xs,
        (1.0 + field.nodal()[last][0]) / vs,
    ));
    Ok(out)
}

/// Largest `|v - vbar(eta)|` over samples with `|eta| <= eta_max`.
pub fn profile_distance(profile: &SimilarityProfile, samples: &[(f64, f64)], eta_max: f64) -> f64 {
    samples
        .iter()
        .filter(|(e, _)| e.abs() <= eta_max)
        .filter_map(|&(e, v)| profile.eval(e).map(|p| (v - p).abs()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshfield::Mesh;

    #[test]
    fn constant_similarity_state() {
        let (t, t_c) = (0.3, 0.38);
        let tau: f64 = t_c - t;
        let u = -1.0 + tau.cbrt() * 3f64.cbrt();
        let field =
            MeshField::from_fn(Mesh::uniform(-1.0, 1.0, 5).unwrap(), |_| [u, 0.0, 0.0, 0.0]);
        let s = rescale_snapshot(&field, t, t_c, 0.0, 0.2).unwrap();
        for (_, v) in s {
            assert!((v - 3f64.cbrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn time_past_touchdown() {
        let field = MeshField::from_fn(Mesh::uniform(-1.0, 1.0, 5).unwrap(), |_| [0.0; 4]);
        assert!(matches!(
            rescale_snapshot(&field, 0.4, 0.38, 0.0, 0.2),
            Err(Error::InvalidTime { .. })
        ));
    }
}
