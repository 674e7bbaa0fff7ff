/// Closed-form estimate of the best test cost reachable from `n` of `big_n`
/// pool pairs on a `dim`-dimensional unitary task:
///
/// n/N + (N − n)/(N·D(D + 1)) · (D + min{n² + 1, D²})
///
/// With `orthogonal` inputs the last term is min{n + 1, D} instead.
pub fn optimal_cost_estimate(n: usize, big_n: usize, dim: usize, orthogonal: bool) -> f64 {
    assert!(n <= big_n && big_n >= 1 && dim >= 1, "need 0 <= n <= N, N >= 1, D >= 1");
    let (n_f, big_f, d) = (n as f64, big_n as f64, dim as f64);
    let reach = if orthogonal {
        (n_f + 1.0).min(d)
    } else {
        (n_f * n_f + 1.0).min(d * d)
    };
    n_f / big_f + (big_f - n_f) / (big_f * d * (d + 1.0)) * (d + reach)
}
