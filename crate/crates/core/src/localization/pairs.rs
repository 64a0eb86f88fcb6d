/// Site pairs `(j, k)`, `k - j = d`, for `d = 0..=d_max`, with both sites at
/// least `edge` away from the chain ends. At most `per_distance` pairs are
/// taken per distance, spread evenly over the admissible positions;
/// `per_distance == 0` keeps all of them.
pub fn sample_pairs(n: usize, edge: usize, d_max: usize, per_distance: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for d in 0..=d_max {
        let lo = edge + 1;
        let Some(hi) = n.checked_sub(edge + d) else {
            continue;
        };
        if hi < lo {
            continue;
        }
        let count = hi - lo + 1;
        if per_distance == 0 || count <= per_distance {
            out.extend((lo..=hi).map(|j| (j, j + d)));
        } else if per_distance == 1 {
            let j = lo + (count - 1) / 2;
            out.push((j, j + d));
        } else {
            for i in 0..per_distance {
                let j = lo + (i * (count - 1) + (per_distance - 1) / 2) / (per_distance - 1);
                out.push((j, j + d));
            }
        }
    }
    out
}
