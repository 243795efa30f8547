//! Kingsbury dual-tree filter banks.
//!
//! Values are the published `near_sym_b` (13,19-tap near-symmetric biorthogonal)
//! and `qshift_b` (14-tap quarter-shift) tables distributed with the Cambridge
//! DTCWT toolbox (N. G. Kingsbury, 2000) and its Python port `dtcwt`.

/// Level-1 analysis lowpass (13 taps).
pub const H0O: [f64; 13] = [
    -0.0017578125,
    0.0,
    0.022265625,
    -0.046875,
    -0.0482421875,
    0.296875,
    0.55546875,
    0.296875,
    -0.0482421875,
    -0.046875,
    0.022265625,
    0.0,
    -0.0017578125,
];

/// Level-1 analysis highpass (19 taps).
pub const H1O: [f64; 19] = [
    -7.062639508928571e-05,
    0.0,
    0.0013419015066964285,
    -0.0018833705357142855,
    -0.007156808035714285,
    0.023856026785714284,
    0.05564313616071428,
    -0.05168805803571428,
    -0.29975760323660716,
    0.5594308035714286,
    -0.29975760323660716,
    -0.05168805803571428,
    0.05564313616071428,
    0.023856026785714284,
    -0.007156808035714285,
    -0.0018833705357142855,
    0.0013419015066964285,
    0.0,
    -7.062639508928571e-05,
];

/// Level-1 synthesis lowpass (19 taps).
pub const G0O: [f64; 19] = [
    7.062639508928571e-05,
    0.0,
    -0.0013419015066964285,
    -0.0018833705357142855,
    0.007156808035714285,
    0.023856026785714284,
    -0.05564313616071428,
    -0.05168805803571428,
    0.29975760323660716,
    0.5594308035714286,
    0.29975760323660716,
    -0.05168805803571428,
    -0.05564313616071428,
    0.023856026785714284,
    0.007156808035714285,
    -0.0018833705357142855,
    -0.0013419015066964285,
    0.0,
    7.062639508928571e-05,
];

/// Level-1 synthesis highpass (13 taps).
pub const G1O: [f64; 13] = [
    -0.0017578125,
    -0.0,
    0.022265625,
    0.046875,
    -0.0482421875,
    -0.296875,
    0.55546875,
    -0.296875,
    -0.0482421875,
    0.046875,
    0.022265625,
    -0.0,
    -0.0017578125,
];

/// Q-shift tree-a analysis lowpass.
pub const H0A: [f64; 14] = [
    0.003253142763653182,
    -0.00388321199915849,
    0.03466034684485349,
    -0.03887280126882779,
    -0.11720388769911527,
    0.27529538466888204,
    0.7561456438925225,
    0.5688104207121227,
    0.011866092033797,
    -0.1067118046866654,
    0.023825384794920298,
    0.01702522388155399,
    -0.005439475937274115,
    -0.004556895628475491,
];

/// Q-shift tree-b analysis lowpass (time reverse of [`H0A`]).
pub const H0B: [f64; 14] = [
    -0.004556895628475491,
    -0.005439475937274115,
    0.01702522388155399,
    0.023825384794920298,
    -0.1067118046866654,
    0.011866092033797,
    0.5688104207121227,
    0.7561456438925225,
    0.27529538466888204,
    -0.11720388769911527,
    -0.03887280126882779,
    0.03466034684485349,
    -0.00388321199915849,
    0.003253142763653182,
];

/// Q-shift tree-a analysis highpass.
pub const H1A: [f64; 14] = [
    -0.004556895628475491,
    0.005439475937274115,
    0.01702522388155399,
    -0.023825384794920298,
    -0.1067118046866654,
    -0.011866092033797,
    0.5688104207121227,
    -0.7561456438925225,
    0.27529538466888204,
    0.11720388769911527,
    -0.03887280126882779,
    -0.03466034684485349,
    -0.00388321199915849,
    -0.003253142763653182,
];

/// Q-shift tree-b analysis highpass.
pub const H1B: [f64; 14] = [
    -0.003253142763653182,
    -0.00388321199915849,
    -0.03466034684485349,
    -0.03887280126882779,
    0.11720388769911527,
    0.27529538466888204,
    -0.7561456438925225,
    0.5688104207121227,
    -0.011866092033797,
    -0.1067118046866654,
    -0.023825384794920298,
    0.01702522388155399,
    0.005439475937274115,
    -0.004556895628475491,
];

/// Q-shift synthesis lowpass, tree a (equal to [`H0B`]).
pub const G0A: [f64; 14] = H0B;
/// Q-shift synthesis lowpass, tree b (equal to [`H0A`]).
pub const G0B: [f64; 14] = H0A;
/// Q-shift synthesis highpass, tree a (equal to [`H1B`]).
pub const G1A: [f64; 14] = H1B;
/// Q-shift synthesis highpass, tree b (equal to [`H1A`]).
pub const G1B: [f64; 14] = H1A;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowpass_gains() {
        assert!((H0O.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((G0O.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((H0A.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn biorthogonal_highpasses_have_no_dc() {
        assert!(H1O.iter().sum::<f64>().abs() < 1e-15);
        assert!(G1O.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn qshift_highpass_dc_leak_is_small() {
        // the published table is not exactly DC-free
        let s = H1A.iter().sum::<f64>();
        assert!(s.abs() < 1e-6 && s.abs() > 1e-9);
    }

    #[test]
    fn qshift_trees_are_time_reversed() {
        let mut rev = H0A;
        rev.reverse();
        assert_eq!(rev, H0B);
    }

    #[test]
    fn qshift_lowpass_is_orthonormal() {
        let e: f64 = H0A.iter().map(|v| v * v).sum();
        assert!((e - 1.0).abs() < 1e-9);
        // double-shift orthogonality
        for shift in (2..14).step_by(2) {
            let dot: f64 = (0..14 - shift).map(|i| H0A[i] * H0A[i + shift]).sum();
            assert!(dot.abs() < 1e-9, "shift {shift}: {dot}");
        }
    }
}
