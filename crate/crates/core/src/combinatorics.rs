//! Small exact combinatorial helpers shared by the counting code.

/// Exact binomial coefficient, `None` on u64 overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * u128::from(n - j) / u128::from(j + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// `C(n, k)` as i64, for signed alternating sums on small instances.
pub fn binom_i64(n: usize, k: usize) -> i64 {
    binomial(n as u64, k as u64).expect("small binomial") as i64
}

pub fn pairs(k: usize) -> usize {
    k * (k.saturating_sub(1)) / 2
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

pub fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|j| (j as f64).ln()).sum()
}

/// `ln C(n, k)` for real-valued n, via log-gamma.
pub fn ln_binomial(n: f64, k: usize) -> f64 {
    use statrs::function::gamma::ln_gamma;
    ln_gamma(n + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma(n - k as f64 + 1.0)
}

/// Every sub-list of `items` of the given size, in lexicographic index order.
pub fn subsets_of_size<T: Copy>(items: &[T], size: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec<T: Copy>(items: &[T], start: usize, size: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        let need = size - cur.len();
        for i in start..items.len() {
            if items.len() - i < need {
                break;
            }
            cur.push(items[i]);
            rec(items, i + 1, size, cur, out);
            cur.pop();
        }
    }
    rec(items, 0, size, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 4), Some(15));
        assert_eq!(binomial(100, 2), Some(4950));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(800, 3), Some(85_013_600));
        assert_eq!(binomial(67, 33), Some(14_226_520_737_620_288_370));
        assert_eq!(binomial(68, 34), None);
    }

    #[test]
    fn subsets_enumerate_all() {
        let s = subsets_of_size(&[1, 2, 3, 4], 2);
        assert_eq!(s.len(), 6);
        assert_eq!(s[0], vec![1, 2]);
        assert_eq!(s[5], vec![3, 4]);
        assert_eq!(subsets_of_size(&[1, 2], 0), vec![Vec::<i32>::new()]);
    }

    #[test]
    fn ln_binomial_matches_exact() {
        let exact = (binomial(40, 7).unwrap() as f64).ln();
        assert!((ln_binomial(40.0, 7) - exact).abs() < 1e-9);
    }
}
