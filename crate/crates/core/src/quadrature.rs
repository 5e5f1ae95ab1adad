//! Adaptive Gauss–Kronrod (7, 15) quadrature.

/// Kronrod abscissae on [0, 1]; the odd entries are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-14, max_depth: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: u64,
}

/// One 15-point Kronrod panel: (Kronrod value, |Kronrod − Gauss|,
/// Kronrod estimate of `∫|f|`).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for i in 0..7 {
        let dx = h * XGK[i];
        let (lo, hi) = (f(c - dx), f(c + dx));
        k += WGK[i] * (lo + hi);
        abs += WGK[i] * (lo.abs() + hi.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (lo + hi);
        }
    }
    (k * h, ((k - g) * h).abs(), abs * h.abs())
}

/// Panels whose error estimate is within this factor of the rounding
/// level of `∫|f|` are accepted as converged.
const ROUNDOFF_FACTOR: f64 = 50.0 * f64::EPSILON;

/// Relative error level below which a panel whose error stops shrinking
/// under bisection is accepted.
const NOISE_FLOOR: f64 = 1e-9;

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: (f64, f64, f64),
    tol: f64,
    depth: u32,
    out: &mut Estimate,
) {
    let (value, err, abs) = whole;
    if err <= tol || err <= ROUNDOFF_FACTOR * abs || depth == 0 {
        out.value += value;
        out.error += err;
        return;
    }
    let m = 0.5 * (a + b);
    let left = gk15(f, a, m);
    let right = gk15(f, m, b);
    out.evaluations += 30;
    if left.1 + right.1 >= err && err <= NOISE_FLOOR * abs {
        // bisection no longer helps: the estimate is at the integrand's
        // own noise level
        out.value += left.0 + right.0;
        out.error += left.1 + right.1;
        return;
    }
    adapt(f, a, m, left, 0.5 * tol, depth - 1, out);
    adapt(f, m, b, right, 0.5 * tol, depth - 1, out);
}

/// Integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Estimate {
    integrate_panels(f, a, b, 1, spec)
}

/// Integral of `f` over `[a, b]` split first into `panels` equal pieces,
/// each refined adaptively. Useful for oscillatory integrands.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    panels: u64,
    spec: &QuadratureSpec,
) -> Estimate {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let coarse: Vec<(f64, f64, (f64, f64, f64))> = (0..panels)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == panels { b } else { lo + width };
            (lo, hi, gk15(&f, lo, hi))
        })
        .collect();
    let total: f64 = coarse.iter().map(|c| c.2 .0.abs()).sum();
    let tol = (spec.rel_tol * total).max(spec.abs_tol);
    let mut out = Estimate { value: 0.0, error: 0.0, evaluations: 15 * panels };
    let mut acc = crate::summation::KahanSum::new();
    for (lo, hi, whole) in coarse {
        let mut piece = Estimate { value: 0.0, error: 0.0, evaluations: 0 };
        adapt(&f, lo, hi, whole, tol / panels as f64, spec.max_depth, &mut piece);
        acc.add(piece.value);
        out.error += piece.error;
        out.evaluations += piece.evaluations;
    }
    out.value = acc.value();
    out
}
