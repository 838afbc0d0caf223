//! Small combinatorial helpers shared by the search and oracle code.

/// Checked binomial coefficient in u128; `None` on overflow.
pub(crate) fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

/// n choose 2 without overflow concerns for the sizes this crate handles.
pub(crate) fn choose2(n: u128) -> u128 {
    n * n.saturating_sub(1) / 2
}

/// Visit every k-subset of {0, .., n-1} in lexicographic order.
/// Stops early when the visitor returns `false`.
pub(crate) fn for_each_combination<F: FnMut(&[usize]) -> bool>(n: usize, k: usize, mut f: F) {
    if k > n {
        return;
    }
    if k == 0 {
        f(&[]);
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        // rightmost position that can still be incremented
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
