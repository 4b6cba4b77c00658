//! Static positional weights.

pub const WEIGHTS_8X8: [[i32; 8]; 8] = [
    [120, -20, 20, 5, 5, 20, -20, 120],
    [-20, -40, -5, -5, -5, -5, -40, -20],
    [20, -5, 15, 3, 3, 15, -5, 20],
    [5, -5, 3, 3, 3, 3, -5, 5],
    [5, -5, 3, 3, 3, 3, -5, 5],
    [20, -5, 15, 3, 3, 15, -5, 20],
    [-20, -40, -5, -5, -5, -5, -40, -20],
    [120, -20, 20, 5, 5, 20, -20, 120],
];

pub const WEIGHTS_6X6: [[i32; 6]; 6] = [
    [50, -10, 10, 10, -10, 50],
    [-10, -20, -5, -5, -20, -10],
    [10, -5, 5, 5, -5, 10],
    [10, -5, 5, 5, -5, 10],
    [-10, -20, -5, -5, -20, -10],
    [50, -10, 10, 10, -10, 50],
];

/// Weight matrix for a board of `size`: the printed 8x8 and 6x6 tables verbatim,
/// otherwise the 8x8 table bilinearly resampled and rounded half away from zero.
pub fn static_weights(size: usize) -> Vec<Vec<i32>> {
    match size {
        8 => WEIGHTS_8X8.iter().map(|r| r.to_vec()).collect(),
        6 => WEIGHTS_6X6.iter().map(|r| r.to_vec()).collect(),
        n => resample_8x8(n),
    }
}

fn resample_8x8(n: usize) -> Vec<Vec<i32>> {
    let axis = |i: usize| -> (usize, usize, f64) {
        let x = i as f64 * 7.0 / (n - 1) as f64;
        let lo = (x.floor() as usize).min(7);
        let hi = (lo + 1).min(7);
        (lo, hi, x - lo as f64)
    };
    let w = |r: usize, c: usize| WEIGHTS_8X8[r][c] as f64;
    (0..n)
        .map(|i| {
            let (r0, r1, tr) = axis(i);
            (0..n)
                .map(|j| {
                    let (c0, c1, tc) = axis(j);
                    let top = w(r0, c0) * (1.0 - tc) + w(r0, c1) * tc;
                    let bottom = w(r1, c0) * (1.0 - tc) + w(r1, c1) * tc;
                    (top * (1.0 - tr) + bottom * tr).round() as i32
                })
                .collect()
        })
        .collect()
}
