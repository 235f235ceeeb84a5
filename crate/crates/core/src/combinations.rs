use alloc::vec::Vec;

/// Calls `f` on each `k`-subset of `0..m` (ascending index lists, lexicographic
/// order) until it returns true. Returns whether any call did.
pub(crate) fn any_combination<F: FnMut(&[usize]) -> bool>(m: usize, k: usize, mut f: F) -> bool {
    if k > m {
        return false;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if f(&idx) {
            return true;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return false;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_binomials() {
        for m in 0..7 {
            for k in 0..=m {
                let mut count = 0usize;
                any_combination(m, k, |_| {
                    count += 1;
                    false
                });
                let binom = (0..k).fold(1usize, |acc, i| acc * (m - i) / (i + 1));
                assert_eq!(count, binom, "C({m},{k})");
            }
        }
    }
}
