//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point panel: returns (Kronrod estimate, |Kronrod − Gauss| per component).
fn panel<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let nodes: &[f64] = if x == 0.0 {
            &[center]
        } else {
            &[center - half * x, center + half * x]
        };
        for &t in nodes {
            f(t, buf);
            for c in 0..dim {
                kronrod[c] += wk * buf[c];
                // Gauss nodes are the odd-indexed Kronrod nodes (center included)
                if i % 2 == 1 {
                    gauss[c] += WG[i / 2] * buf[c];
                }
            }
        }
    }
    let err = kronrod
        .iter()
        .zip(&gauss)
        .map(|(k, g)| (k - g).abs() * half)
        .collect();
    (kronrod.iter().map(|k| k * half).collect(), err)
}

/// Integrates the `dim`-component function `f` over `[a, b]` until the
/// estimated absolute error of every component is below `tol`.
///
/// `f(x, out)` writes the integrand values at `x` into `out`.
pub fn integrate_vec<F>(mut f: F, a: f64, b: f64, dim: usize, tol: f64) -> Vec<f64>
where
    F: FnMut(f64, &mut [f64]),
{
    let mut buf = vec![0.0; dim];
    let (total, err) = panel(&mut f, a, b, dim, &mut buf);
    let mut intervals = vec![(a, b, total, err)];
    for _ in 0..2000 {
        let (worst_idx, worst_err) = intervals
            .iter()
            .enumerate()
            .map(|(i, iv)| (i, iv.3.iter().cloned().fold(0.0, f64::max)))
            .fold((0, 0.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        let total_err: Vec<f64> = (0..dim)
            .map(|c| intervals.iter().map(|iv| iv.3[c]).sum::<f64>())
            .collect();
        if total_err.iter().all(|&e| e <= tol) || worst_err == 0.0 {
            break;
        }
        let (lo, hi, _, _) = intervals.swap_remove(worst_idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = panel(&mut f, lo, mid, dim, &mut buf);
        let (v2, e2) = panel(&mut f, mid, hi, dim, &mut buf);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    (0..dim)
        .map(|c| intervals.iter().map(|iv| iv.2[c]).sum())
        .collect()
}

pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    integrate_vec(|x, out| out[0] = f(x), a, b, 1, tol)[0]
}
