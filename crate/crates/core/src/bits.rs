//! Word-level helpers for fixed-width bit rows.

#[inline]
pub fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

#[inline]
pub fn test(row: &[u64], v: usize) -> bool {
    row[v >> 6] >> (v & 63) & 1 == 1
}

#[inline]
pub fn set(row: &mut [u64], v: usize) {
    row[v >> 6] |= 1 << (v & 63);
}

#[inline]
pub fn clear(row: &mut [u64], v: usize) {
    row[v >> 6] &= !(1 << (v & 63));
}

#[inline]
pub fn popcount(row: &[u64]) -> u64 {
    row.iter().map(|w| u64::from(w.count_ones())).sum()
}

#[inline]
pub fn and_assign(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d &= *s;
    }
}

/// `dst = a & b`, restricted to bits strictly above `x`.
#[inline]
pub fn and_above(dst: &mut [u64], a: &[u64], b: &[u64], x: usize) {
    let wx = x >> 6;
    let bit = x & 63;
    dst[..wx].fill(0);
    let mask = if bit == 63 { 0 } else { !0u64 << (bit + 1) };
    dst[wx] = a[wx] & b[wx] & mask;
    for w in wx + 1..dst.len() {
        dst[w] = a[w] & b[w];
    }
}

/// Popcount of `a & b` above bit `x`, without materializing the row.
#[inline]
pub fn count_and_above(a: &[u64], b: &[u64], x: usize) -> u64 {
    let wx = x >> 6;
    let bit = x & 63;
    let mask = if bit == 63 { 0 } else { !0u64 << (bit + 1) };
    let mut c = u64::from((a[wx] & b[wx] & mask).count_ones());
    for w in wx + 1..a.len() {
        c += u64::from((a[w] & b[w]).count_ones());
    }
    c
}

pub fn ones(row: &[u64]) -> Ones<'_> {
    Ones {
        row,
        word: 0,
        cur: row.first().copied().unwrap_or(0),
    }
}

pub struct Ones<'a> {
    row: &'a [u64],
    word: usize,
    cur: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let t = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.word * 64 + t);
            }
            self.word += 1;
            if self.word >= self.row.len() {
                return None;
            }
            self.cur = self.row[self.word];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn and_above_masks_word_boundaries() {
        let a = vec![!0u64; 3];
        let b = vec![!0u64; 3];
        let mut d = vec![0u64; 3];
        and_above(&mut d, &a, &b, 63);
        assert_eq!(d, vec![0, !0, !0]);
        assert_eq!(count_and_above(&a, &b, 63), 128);
        and_above(&mut d, &a, &b, 0);
        assert_eq!(popcount(&d), 191);
        assert_eq!(count_and_above(&a, &b, 130), 61);
    }

    #[test]
    fn ones_walks_in_order() {
        let mut row = vec![0u64; 2];
        for v in [0, 5, 63, 64, 100] {
            set(&mut row, v);
        }
        assert_eq!(ones(&row).collect::<Vec<_>>(), vec![0, 5, 63, 64, 100]);
        clear(&mut row, 63);
        assert!(!test(&row, 63));
        assert_eq!(popcount(&row), 4);
    }
}
