//! Small enumeration helpers shared by the builders and verifiers.

/// Calls `f` on every subset of `{0..m}` with at most `k_max` elements,
/// the empty set first, in lexicographic order within each size.
pub(crate) fn for_each_subset(m: usize, k_max: usize, mut f: impl FnMut(&[usize])) {
    let mut buf: Vec<usize> = Vec::new();
    f(&buf);
    for k in 1..=k_max.min(m) {
        buf.clear();
        buf.extend(0..k);
        'combos: loop {
            f(&buf);
            // Advance the rightmost index that still has room to grow.
            let mut i = k;
            while i > 0 {
                i -= 1;
                if buf[i] < m - k + i {
                    buf[i] += 1;
                    for j in i + 1..k {
                        buf[j] = buf[j - 1] + 1;
                    }
                    continue 'combos;
                }
            }
            break;
        }
    }
}

/// Number of subsets of an `m`-set with at most `k` elements, saturating.
pub(crate) fn subsets_up_to(m: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    for i in 0..=k.min(m) {
        total = total.saturating_add(binomial(m, i));
    }
    total
}

pub(crate) fn binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((m - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// All permutations of `items`, in a deterministic order.
pub(crate) fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut buf = items.to_vec();
    permute(&mut buf, 0, &mut out);
    out
}

fn permute<T: Clone>(buf: &mut Vec<T>, k: usize, out: &mut Vec<Vec<T>>) {
    if k == buf.len() {
        out.push(buf.clone());
        return;
    }
    for i in k..buf.len() {
        buf.swap(k, i);
        permute(buf, k + 1, out);
        buf.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerate_exactly_once() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len() as u128, subsets_up_to(4, 2));
        assert_eq!(seen[0], Vec::<usize>::new());
        let mut dedup = seen.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), seen.len());
        assert_eq!(subsets_up_to(4, 2), 1 + 4 + 6);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(&[1, 2, 3]).len(), 6);
        assert_eq!(permutations::<usize>(&[]).len(), 1);
    }
}
