//! Small spatial-filtering helpers shared by the detectors and the synthetic
//! generators: sampled Gaussian kernels and separable mirror-boundary
//! convolution.

/// Sampled Gaussian normalized to unit sum; radius `ceil(4 sigma)`.
pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil() as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Derivative of the unit-sum Gaussian: `-x / sigma^2 * G(x)`. Odd taps
/// cancel pairwise, so the kernel sums to zero exactly.
pub(crate) fn gaussian_derivative_kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil() as i64;
    let gauss: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = gauss.iter().sum();
    (-radius..=radius)
        .zip(&gauss)
        .map(|(i, &g)| -(i as f64) / (sigma * sigma) * g / sum)
        .collect()
}

/// Mirror index (reflect without repeating the edge sample).
fn mirror_index(i: i64, n: i64) -> usize {
    let mut idx = i;
    // Reflect until in range; kernels are short so this loops at most twice.
    loop {
        if idx < 0 {
            idx = -idx;
        } else if idx >= n {
            idx = 2 * (n - 1) - idx;
        } else {
            return idx as usize;
        }
    }
}

/// Convolve a 1D signal with a centered kernel under mirror boundaries.
pub(crate) fn convolve_mirror_1d(x: &[f64], kernel: &[f64]) -> Vec<f64> {
    let n = x.len() as i64;
    let radius = (kernel.len() / 2) as i64;
    (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .map(|(k, &w)| w * x[mirror_index(i + k as i64 - radius, n)])
                .sum()
        })
        .collect()
}

/// Convolve every row of a row-major field.
pub(crate) fn convolve_rows(data: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(data.len());
    for y in 0..height {
        out.extend(convolve_mirror_1d(&data[y * width..(y + 1) * width], kernel));
    }
    out
}

/// Convolve every column of a row-major field.
pub(crate) fn convolve_cols(data: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let n = height as i64;
    let radius = (kernel.len() / 2) as i64;
    let mut out = vec![0.0; data.len()];
    let mut column = vec![0.0; height];
    for x in 0..width {
        for y in 0..height {
            column[y] = data[y * width + x];
        }
        for y in 0..height as i64 {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                acc += w * column[mirror_index(y + k as i64 - radius, n)];
            }
            out[y as usize * width + x] = acc;
        }
    }
    out
}

/// Separable Gaussian blur of a row-major field, mirror boundaries.
pub(crate) fn gaussian_blur_2d(data: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    let kernel = gaussian_kernel(sigma);
    let rows = convolve_rows(data, width, height, &kernel);
    convolve_cols(&rows, width, height, &kernel)
}
