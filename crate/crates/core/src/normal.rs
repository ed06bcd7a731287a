//! Univariate and multivariate normal probabilities.
//!
//! Everything here runs in `f64`; callers cast into their scalar type. The
//! bivariate routine is Genz's BVNU (Drezner–Wesolowsky with Gauss–Legendre
//! refinements), accurate to roughly double precision. Rectangles in three or
//! more dimensions under an exchangeable correlation use the one-factor
//! representation and composite Gauss–Legendre quadrature.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::{erfc, erfc_inv};

/// Standard normal CDF.
#[inline]
pub fn cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-x / SQRT_2)
    }
}

/// Standard normal upper tail `P(Z >= x)`.
#[inline]
pub fn sf(x: f64) -> f64 {
    cdf(-x)
}

/// Standard normal density.
#[inline]
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile function.
pub fn ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    // One Newton step tightens the tails.
    let d = pdf(x);
    if d > 0.0 {
        x -= (cdf(x) - p) / d;
    }
    x
}

const GL6_W: [f64; 3] = [0.1713244923791705, 0.3607615730481384, 0.4679139345726904];
const GL6_X: [f64; 3] = [0.9324695142031522, 0.6612093864662647, 0.238_619_186_083_197];
const GL12_W: [f64; 6] = [
    0.04717533638651177,
    0.1069393259953183,
    0.1600783285433464,
    0.2031674267230659,
    0.2334925365383547,
    0.2491470458134029,
];
const GL12_X: [f64; 6] = [
    0.9815606342467191,
    0.904_117_256_370_475,
    0.769_902_674_194_305,
    0.5873179542866171,
    0.3678314989981802,
    0.1252334085114692,
];
const GL20_W: [f64; 10] = [
    0.01761400713915212,
    0.04060142980038694,
    0.06267204833410906,
    0.08327674157670475,
    0.1019301198172404,
    0.1181945319615184,
    0.1316886384491766,
    0.1420961093183821,
    0.1491729864726037,
    0.1527533871307259,
];
const GL20_X: [f64; 10] = [
    0.9931285991850949,
    0.9639719272779138,
    0.912_234_428_251_326,
    0.8391169718222188,
    0.7463319064601508,
    0.636_053_680_726_515,
    0.5108670019508271,
    0.3737060887154196,
    0.2277858511416451,
    0.07652652113349733,
];

/// Bivariate upper orthant `P(X > h, Y > k)` for standard normals with
/// correlation `r`.
pub fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return if k == f64::NEG_INFINITY { 1.0 } else { sf(k) };
    }
    if k == f64::NEG_INFINITY {
        return sf(h);
    }
    if r == 0.0 {
        return sf(h) * sf(k);
    }
    let (w, x): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&GL6_W, &GL6_X)
    } else if r.abs() < 0.75 {
        (&GL12_W, &GL12_X)
    } else {
        (&GL20_W, &GL20_X)
    };
    // Nodes on (0, 2): 1 - x and 1 + x, each with weight w.
    let nodes = || {
        w.iter()
            .zip(x)
            .flat_map(|(&wi, &xi)| [(wi, 1.0 - xi), (wi, 1.0 + xi)])
    };
    let tp = 2.0 * PI;
    let mut k = k;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin() / 2.0;
        for (wi, xi) in nodes() {
            let sn = (asr * xi).sin();
            bvn += wi * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
        }
        bvn = bvn * asr / tp + sf(h) * sf(k);
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let as_ = 1.0 - r * r;
            let mut a = as_.sqrt();
            let bs = (h - k) * (h - k);
            let asr = -(bs / as_ + hk) / 2.0;
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 80.0;
            if asr > -100.0 {
                bvn = a * asr.exp() * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0 + c * d * as_ * as_);
            }
            if hk > -100.0 {
                let b = bs.sqrt();
                let sp = tp.sqrt() * cdf(-b / a);
                bvn -= (-hk / 2.0).exp() * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
            }
            a /= 2.0;
            let mut acc = 0.0;
            for (wi, xi) in nodes() {
                let xs = (a * xi) * (a * xi);
                let asr = -(bs / xs + hk) / 2.0;
                if asr > -100.0 {
                    let sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                    let rs = (1.0 - xs).sqrt();
                    let ep = (-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))).exp() / rs;
                    acc += wi * asr.exp() * (sp - ep);
                }
            }
            bvn = (a * acc - bvn) / tp;
        }
        if r > 0.0 {
            bvn += sf(h.max(k));
        } else if h >= k {
            bvn = -bvn;
        } else {
            let l = if h < 0.0 { cdf(k) - cdf(h) } else { sf(h) - sf(k) };
            bvn = l - bvn;
        }
    }
    bvn.clamp(0.0, 1.0)
}

/// Bivariate CDF `P(X <= h, Y <= k)`.
#[inline]
pub fn bvn_cdf(h: f64, k: f64, r: f64) -> f64 {
    bvn_upper(-h, -k, r)
}

/// `P(a1 < X <= b1, a2 < Y <= b2)`.
pub fn bvn_rect(a1: f64, b1: f64, a2: f64, b2: f64, r: f64) -> f64 {
    let p = bvn_cdf(b1, b2, r) - bvn_cdf(a1, b2, r) - bvn_cdf(b1, a2, r) + bvn_cdf(a1, a2, r);
    p.max(0.0)
}

/// Composite Gauss–Legendre integral of `f` over `[lo, hi]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        let half = h / 2.0;
        for (&w, &x) in GL20_W.iter().zip(&GL20_X) {
            total += w * (f(mid - half * x) + f(mid + half * x));
        }
    }
    total * h / 2.0
}

/// Rectangle probability for an exchangeable multivariate normal with
/// non-negative correlation `rho`, bounds given in z-space.
pub fn exchangeable_rect(lower: &[f64], upper: &[f64], rho: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&rho));
    if rho == 0.0 {
        return lower
            .iter()
            .zip(upper)
            .map(|(&a, &b)| (cdf(b) - cdf(a)).max(0.0))
            .product();
    }
    let s = rho.sqrt();
    let t = (1.0 - rho).sqrt();
    let integrand = |z: f64| {
        let mut prod = pdf(z);
        for (&a, &b) in lower.iter().zip(upper) {
            prod *= (cdf((b - s * z) / t) - cdf((a - s * z) / t)).max(0.0);
        }
        prod
    };
    gauss_legendre(integrand, -9.0, 9.0, 120).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bvn_cdf_by_quadrature(h: f64, k: f64, r: f64) -> f64 {
        let s = (1.0 - r * r).sqrt();
        gauss_legendre(|x| pdf(x) * cdf((k - r * x) / s), -12.0, h, 400)
    }

    #[test]
    fn ppf_inverts_cdf() {
        for &p in &[1e-10, 0.001, 0.125, 0.375, 0.5, 0.625, 0.875, 0.999] {
            assert!((cdf(ppf(p)) - p).abs() < 1e-14 * p.max(1e-3), "p={p}");
        }
        assert_eq!(ppf(0.5), 0.0);
    }

    #[test]
    fn orthant_matches_arcsine_formula() {
        for &r in &[-0.95f64, -0.9, -0.5, -0.2, 0.1, 0.5, 0.8, 0.93, 0.99] {
            let expected = 0.25 + r.asin() / (2.0 * PI);
            assert!((bvn_cdf(0.0, 0.0, r) - expected).abs() < 1e-14, "r={r}");
        }
    }

    #[test]
    fn bvn_matches_quadrature() {
        for &r in &[-0.97, -0.8, -0.4, -0.1, 0.2, 0.6, 0.9, 0.96] {
            for &(h, k) in &[(-1.3, 0.4), (0.7, 0.7), (2.0, -0.5), (-0.3, -2.2), (1.1, 1.9)] {
                let a = bvn_cdf(h, k, r);
                let b = bvn_cdf_by_quadrature(h, k, r);
                assert!((a - b).abs() < 1e-11, "h={h} k={k} r={r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn exchangeable_rect_agrees_with_bivariate() {
        let r = 0.45;
        let p = exchangeable_rect(&[-0.3, f64::NEG_INFINITY], &[1.2, 0.5], r);
        let q = bvn_rect(-0.3, 1.2, f64::NEG_INFINITY, 0.5, r);
        assert!((p - q).abs() < 1e-11);
    }
}
