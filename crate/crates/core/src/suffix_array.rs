//! Suffix array construction by prefix doubling with radix passes,
//! `O(n log n)`.

/// Start positions of all suffixes of `text` in lexicographic order. A proper
/// prefix sorts before any longer string it prefixes.
pub fn suffix_array(text: &[u8]) -> Vec<u32> {
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(n < u32::MAX as usize, "text too long for 32-bit positions");

    let mut sa: Vec<usize> = (0..n).collect();
    sa.sort_by_key(|&i| text[i]);
    let mut rank = vec![0usize; n];
    for w in 1..n {
        let (a, b) = (sa[w - 1], sa[w]);
        rank[b] = rank[a] + usize::from(text[a] != text[b]);
    }

    let mut second = Vec::with_capacity(n);
    let mut count = vec![0usize; n + 1];
    let mut next = vec![0usize; n];
    let mut k = 1;
    while rank[sa[n - 1]] < n - 1 {
        // Order by the rank of the second half; suffixes without one go first.
        second.clear();
        second.extend(n - k.min(n)..n);
        second.extend(sa.iter().filter(|&&p| p >= k).map(|&p| p - k));

        // Stable counting sort by the first-half rank.
        count.iter_mut().for_each(|c| *c = 0);
        for &p in &second {
            count[rank[p] + 1] += 1;
        }
        for r in 1..count.len() {
            count[r] += count[r - 1];
        }
        for &p in &second {
            sa[count[rank[p]]] = p;
            count[rank[p]] += 1;
        }

        let key = |p: usize, rank: &[usize]| (rank[p], (p + k < n).then(|| rank[p + k]));
        next[sa[0]] = 0;
        for w in 1..n {
            let (a, b) = (sa[w - 1], sa[w]);
            next[b] = next[a] + usize::from(key(a, &rank) != key(b, &rank));
        }
        std::mem::swap(&mut rank, &mut next);
        k *= 2;
    }
    sa.into_iter().map(|p| p as u32).collect()
}
