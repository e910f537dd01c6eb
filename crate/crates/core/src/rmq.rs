//! Sparse-table range maximum queries over interval lengths.

/// O(1) index-of-maximum queries after O(n log n) preprocessing.
/// Ties resolve to the lowest index.
#[derive(Debug, Clone)]
pub struct Rmq {
    values: Vec<u64>,
    /// table[level][j] = index of the max in values[j .. j + 2^level].
    table: Vec<Vec<u32>>,
}

impl Rmq {
    pub fn new(values: Vec<u64>) -> Rmq {
        assert!(!values.is_empty(), "RMQ over an empty array");
        let n = values.len();
        let levels = n.ilog2() as usize + 1;
        let mut table = Vec::with_capacity(levels);
        table.push((0..n as u32).collect::<Vec<_>>());
        for k in 1..levels {
            let half = 1usize << (k - 1);
            let prev = &table[k - 1];
            let row: Vec<u32> = (0..=n - (1 << k))
                .map(|j| {
                    let a = prev[j];
                    let b = prev[j + half];
                    if values[b as usize] > values[a as usize] {
                        b
                    } else {
                        a
                    }
                })
                .collect();
            table.push(row);
        }
        Rmq { values, table }
    }

    /// Index of the maximum of values[j..=k], lowest index on ties.
    pub fn query(&self, j: usize, k: usize) -> usize {
        debug_assert!(j <= k && k < self.values.len());
        let len = k - j + 1;
        let level = len.ilog2() as usize;
        let a = self.table[level][j];
        let b = self.table[level][k + 1 - (1 << level)];
        if self.values[b as usize] > self.values[a as usize] {
            b as usize
        } else {
            a as usize
        }
    }

    #[inline]
    pub fn value(&self, i: usize) -> u64 {
        self.values[i]
    }
}
