/// Cumulative table of ln(k!) for k up to a fixed bound.
///
/// Series terms combine factorials of indices bounded by `smax + dim`, so a
/// single table sized once per matrix fill serves every element; the table is
/// immutable and can be shared across worker threads.
#[derive(Debug, Clone)]
pub struct LnFactorial {
    table: Vec<f64>,
}

impl LnFactorial {
    pub fn new(max_n: usize) -> Self {
        let mut table = Vec::with_capacity(max_n + 1);
        table.push(0.0);
        let mut acc = super::Accumulator::new();
        for k in 1..=max_n {
            acc.add((k as f64).ln());
            table.push(acc.value());
        }
        Self { table }
    }

    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.table[n]
    }

    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }

    /// ln C(n, k); requires k <= n.
    #[inline]
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        self.table[n] - self.table[k] - self.table[n - k]
    }

    /// ln of the falling factorial k!/(k-p)!; requires p <= k.
    #[inline]
    pub fn ln_falling(&self, k: usize, p: usize) -> f64 {
        self.table[k] - self.table[k - p]
    }
}
