//! Dimension counts for parabolic systems and their tableaux.

fn binomial(n: i64, k: i64) -> u64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Dimension of the trace-free symmetric tensors `Sym^s_0(R^n)`.
pub fn traceless_sym_dimension(n: usize, s: usize) -> u64 {
    let (n, s) = (n as i64, s as i64);
    binomial(n + s - 1, s) - binomial(n + s - 3, s - 2)
}

/// Dimension of the `r`-th prolonged tableau `K^(r)`: the kernel of the
/// spatial trace `Sym^{r+2}(R^{n+1}) -> Sym^r(R^{n+1})`.
pub fn tableau_dimension(n: usize, r: usize) -> u64 {
    assert!(n >= 1, "spatial dimension must be positive");
    (0..=2 + r).map(|s| traceless_sym_dimension(n, s)).sum()
}

/// Dimension `2n + 2 + (n+1)(n+2)/2` of the parabolic exterior differential system.
pub fn parabolic_system_dimension(n: usize) -> u64 {
    assert!(n >= 1, "spatial dimension must be positive");
    let n = n as u64;
    2 * n + 2 + (n + 1) * (n + 2) / 2
}

/// Dimension `2n + 3` of a Monge-Ampere deprolongation.
pub fn deprolongation_dimension(n: usize) -> u64 {
    assert!(n >= 1, "spatial dimension must be positive");
    2 * n as u64 + 3
}
