//! Graded indexing of monomials / partial-derivative multi-indices in three
//! variables. Index 0 is the empty multi-index, then the three first-order
//! indices, then the six second-order ones, and so on. Within one degree the
//! ordering is lexicographically descending, e.g. `(2,0,0) (1,1,0) (1,0,1)
//! (0,2,0) (0,1,1) (0,0,2)`.

use std::sync::OnceLock;

pub type MultiIndex = [u8; 3];

/// Largest total degree supported by the cached tables.
pub const MAX_DEGREE: usize = 8;

/// Number of monomials of total degree `<= degree`.
#[inline]
pub const fn count_up_to(degree: usize) -> usize {
    (degree + 1) * (degree + 2) * (degree + 3) / 6
}

/// Number of monomials of total degree exactly `degree`.
#[inline]
pub const fn count_of(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

#[inline]
pub fn order(m: &MultiIndex) -> usize {
    (m[0] + m[1] + m[2]) as usize
}

/// Position of a multi-index in the graded ordering.
#[inline]
pub fn index_of(m: &MultiIndex) -> usize {
    let d = order(m);
    let a = m[0] as usize;
    let b = m[1] as usize;
    let offset = if d == 0 { 0 } else { count_up_to(d - 1) };
    offset + (d - a) * (d - a + 1) / 2 + (d - a - b)
}

fn build_list() -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(count_up_to(MAX_DEGREE));
    for d in 0..=MAX_DEGREE as u8 {
        for a in (0..=d).rev() {
            for b in (0..=d - a).rev() {
                out.push([a, b, d - a - b]);
            }
        }
    }
    out
}

/// All multi-indices up to [`MAX_DEGREE`] in graded order.
pub fn all() -> &'static [MultiIndex] {
    static LIST: OnceLock<Vec<MultiIndex>> = OnceLock::new();
    LIST.get_or_init(build_list)
}

#[inline]
pub fn at(index: usize) -> MultiIndex {
    all()[index]
}

/// Multi-index of a list of Cartesian indices, e.g. `[0, 2, 2] -> (1,0,2)`.
pub fn from_indices(indices: &[usize]) -> MultiIndex {
    let mut m = [0u8; 3];
    for &i in indices {
        m[i] += 1;
    }
    m
}

#[inline]
pub fn add(a: &MultiIndex, b: &MultiIndex) -> MultiIndex {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn unit(i: usize) -> MultiIndex {
    let mut m = [0u8; 3];
    m[i] = 1;
    m
}

/// `m!` = m1! m2! m3!
pub fn factorial(m: &MultiIndex) -> f64 {
    m.iter()
        .map(|&k| (1..=k as u32).map(f64::from).product::<f64>())
        .product()
}

/// Product table for truncated multiplication: every `(i, j, k)` with
/// `at(i) + at(j) == at(k)` and `order(at(k)) <= degree`.
pub fn product_table(degree: usize) -> &'static [(u16, u16, u16)] {
    static TABLES: OnceLock<Vec<Vec<(u16, u16, u16)>>> = OnceLock::new();
    assert!(degree <= MAX_DEGREE, "degree {degree} above MAX_DEGREE");
    let tables = TABLES.get_or_init(|| {
        (0..=MAX_DEGREE)
            .map(|deg| {
                let n = count_up_to(deg);
                let list = all();
                let mut t = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        let s = add(&list[i], &list[j]);
                        if order(&s) <= deg {
                            t.push((i as u16, j as u16, index_of(&s) as u16));
                        }
                    }
                }
                t
            })
            .collect()
    });
    &tables[degree]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_roundtrips() {
        for (i, m) in all().iter().enumerate() {
            assert_eq!(index_of(m), i);
        }
        assert_eq!(all().len(), count_up_to(MAX_DEGREE));
        assert_eq!(at(4), [2, 0, 0]);
        assert_eq!(at(9), [0, 0, 2]);
        assert_eq!(count_of(2), 6);
    }

    #[test]
    fn from_indices_counts() {
        assert_eq!(from_indices(&[0, 2, 2]), [1, 0, 2]);
        assert_eq!(factorial(&[2, 0, 3]), 12.0);
    }

    #[test]
    fn product_table_size() {
        // pairs of monomials of total degree <= 2 in 6 variables
        assert_eq!(product_table(2).len(), 28);
    }
}
