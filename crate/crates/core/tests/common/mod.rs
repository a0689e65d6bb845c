//! Oracles shared by the integration tests.
#![allow(dead_code)]

/// Brute-force oracle: some permutation of `0..k` maps `a` onto `b`.
pub fn equivalent_by_permutation(a: &[usize], b: &[usize], k: usize) -> bool {
    fn permute(perm: &mut Vec<usize>, used: &mut Vec<bool>, k: usize, a: &[usize], b: &[usize]) -> bool {
        if perm.len() == k {
            return a.iter().zip(b).all(|(&x, &y)| perm[x] == y);
        }
        for v in 0..k {
            if !used[v] {
                used[v] = true;
                perm.push(v);
                if permute(perm, used, k, a, b) {
                    return true;
                }
                perm.pop();
                used[v] = false;
            }
        }
        false
    }
    permute(&mut Vec::new(), &mut vec![false; k], k, a, b)
}
