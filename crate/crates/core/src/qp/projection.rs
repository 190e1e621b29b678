/// Euclidean projection onto the probability simplex `{w >= 0, Σw = 1}`.
///
/// Sort-based: find the largest `ρ` with `u_ρ − (Σ_{j<=ρ} u_j − 1)/ρ > 0`
/// over the descending sort `u`, then shift and clip.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}
