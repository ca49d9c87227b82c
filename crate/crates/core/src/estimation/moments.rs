//! Gaussian moments for an i.i.d. `N(0, 1)` delay line.

/// `E[x^m]` for `x ~ N(0, 1)`: zero for odd `m`, `(m-1)!!` for even `m`.
pub fn standard_normal_moment(m: usize) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    (1..m).step_by(2).map(|k| k as f64).product()
}

/// `E[Π_k u(i - lag_k)]` over the combined list of lags.
///
/// Distinct lags are independent, so the expectation factors into one
/// standard-normal moment per lag, raised to that lag's multiplicity.
pub fn lag_product_moment(lags: &[usize]) -> f64 {
    let mut sorted = lags.to_vec();
    sorted.sort_unstable();
    let mut out = 1.0;
    let mut run = 0;
    for (n, lag) in sorted.iter().enumerate() {
        run += 1;
        if sorted.get(n + 1) != Some(lag) {
            if run % 2 == 1 {
                return 0.0;
            }
            out *= standard_normal_moment(run);
            run = 0;
        }
    }
    out
}

/// Sum over perfect matchings of `Π gram[a][b]` (the hafnian).
///
/// With `gram[a][b] = v_a · v_b` this is `E[Π_a (u · v_a)]` for
/// `u ~ N(0, I)`, by Isserlis' theorem.
pub fn hafnian(gram: &[Vec<f64>]) -> f64 {
    let n = gram.len();
    if n % 2 == 1 {
        return 0.0;
    }
    let mut used = vec![false; n];
    hafnian_rec(gram, &mut used)
}

fn hafnian_rec(gram: &[Vec<f64>], used: &mut [bool]) -> f64 {
    let Some(first) = used.iter().position(|u| !u) else {
        return 1.0;
    };
    used[first] = true;
    let mut total = 0.0;
    for j in first + 1..used.len() {
        if used[j] || gram[first][j] == 0.0 {
            continue;
        }
        used[j] = true;
        total += gram[first][j] * hafnian_rec(gram, used);
        used[j] = false;
    }
    used[first] = false;
    total
}

/// `E[Π_a (u · v_a)]` for `u ~ N(0, I_M)` and equal-length vectors `v_a`.
pub fn gaussian_linear_form_moment(vectors: &[&[f64]]) -> f64 {
    let n = vectors.len();
    if n % 2 == 1 {
        return 0.0;
    }
    let mut gram = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a..n {
            let g = crate::tensor::dot(vectors[a], vectors[b]);
            gram[a][b] = g;
            gram[b][a] = g;
        }
    }
    hafnian(&gram)
}
