//! Complex root isolation for squarefree integer polynomials.
//!
//! Roots are approximated by Aberth iteration in double precision and then
//! certified: the disk of radius `d |f(z_i)| / (|a_d| prod_{j != i} |z_i - z_j|)`
//! around each approximation contains a root, and when the disks are
//! pairwise disjoint each holds exactly one.

use num_complex::Complex64;

use super::poly::{horner_complex, IntPoly};
use super::PlaceError;

const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// An isolating disk around one complex root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootDisk {
    pub center: Complex64,
    pub radius: f64,
}

impl RootDisk {
    pub fn is_real(&self) -> bool {
        self.center.im == 0.0
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }
}

/// Isolating disks for every root, ordered by real part then imaginary part.
pub fn isolate_roots(f: &IntPoly) -> Result<Vec<RootDisk>, PlaceError> {
    isolate_roots_refined(f, 0)
}

/// As [`isolate_roots`], with `extra` additional Newton passes. Each pass
/// keeps the smaller of the old and new certified radius per root, so the
/// radii never grow.
pub fn isolate_roots_refined(f: &IntPoly, extra: usize) -> Result<Vec<RootDisk>, PlaceError> {
    let coeffs = f.to_f64_exact().ok_or(PlaceError::PrecisionInsufficient)?;
    let d = f.degree();
    if d == 0 {
        return Ok(Vec::new());
    }
    if d == 1 {
        let z = Complex64::new(-coeffs[0] / coeffs[1], 0.0);
        let radius = z.norm() * UNIT_ROUNDOFF;
        return Ok(vec![RootDisk { center: z, radius }]);
    }
    let mut z = aberth(&coeffs)?;
    symmetrize(&mut z);
    let mut disks = certify(&coeffs, &z)?;
    for _ in 0..extra {
        for zi in z.iter_mut() {
            let dz = newton_step(&coeffs, *zi);
            if dz.is_finite() {
                *zi -= dz;
            }
        }
        symmetrize(&mut z);
        let fresh = certify(&coeffs, &z)?;
        for (old, new) in disks.iter_mut().zip(fresh) {
            if new.radius < old.radius && (new.center - old.center).norm() + new.radius <= old.radius {
                *old = new;
            }
        }
    }
    disks.sort_by(|a, b| {
        a.center
            .re
            .total_cmp(&b.center.re)
            .then(a.center.im.total_cmp(&b.center.im))
    });
    Ok(disks)
}

fn newton_step(c: &[f64], z: Complex64) -> Complex64 {
    let (fz, _) = horner_complex(c, z);
    let dc: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect();
    let (dfz, _) = horner_complex(&dc, z);
    fz / dfz
}

fn aberth(c: &[f64]) -> Result<Vec<Complex64>, PlaceError> {
    let d = c.len() - 1;
    let lead = c[d].abs();
    // Fujiwara bound on root moduli
    let bound = (0..d)
        .map(|k| (c[k].abs() / lead).powf(1.0 / (d - k) as f64) * if k == 0 { 1.0 } else { 2.0 })
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(0.5 * bound, 0.4 + std::f64::consts::TAU * k as f64 / d as f64))
        .collect();
    let dc: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect();
    for _ in 0..2000 {
        let mut max_step = 0.0f64;
        for i in 0..d {
            let (fz, _) = horner_complex(c, z[i]);
            if fz == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (dfz, _) = horner_complex(&dc, z[i]);
            let ratio = fz / dfz;
            let s: Complex64 = (0..d).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                max_step = max_step.max(w.norm() / z[i].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            for zi in z.iter_mut() {
                let dz = newton_step(c, *zi);
                if dz.is_finite() {
                    *zi -= dz;
                }
            }
            return Ok(z);
        }
    }
    Err(PlaceError::PrecisionInsufficient)
}

/// Pairs up complex conjugates so that the ordering of a conjugate pair is exact.
fn symmetrize(z: &mut [Complex64]) {
    let n = z.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] || z[i].im <= 0.0 {
            continue;
        }
        let partner = (0..n)
            .filter(|&j| !used[j] && j != i && z[j].im < 0.0)
            .min_by(|&a, &b| (z[a] - z[i].conj()).norm().total_cmp(&(z[b] - z[i].conj()).norm()));
        if let Some(j) = partner.filter(|&j| (z[j] - z[i].conj()).norm() < 1e-8 * z[i].norm().max(1.0)) {
            let avg = (z[i] + z[j].conj()) * 0.5;
            z[i] = avg;
            z[j] = avg.conj();
            used[i] = true;
            used[j] = true;
        }
    }
}

fn certify(c: &[f64], z: &[Complex64]) -> Result<Vec<RootDisk>, PlaceError> {
    let d = z.len();
    let lead = c[d].abs();
    let gamma = (2 * d + 2) as f64 * UNIT_ROUNDOFF * 1.01;
    let mut disks = Vec::with_capacity(d);
    for i in 0..d {
        let (fz, mag) = horner_complex(c, z[i]);
        let f_upper = (fz.norm() + gamma * mag) * (1.0 + 4.0 * UNIT_ROUNDOFF);
        let mut prod = lead;
        for j in 0..d {
            if j != i {
                prod *= (z[i] - z[j]).norm() * (1.0 - 4.0 * UNIT_ROUNDOFF);
            }
        }
        let radius = d as f64 * f_upper / prod * (1.0 + 4.0 * d as f64 * UNIT_ROUNDOFF);
        if !radius.is_finite() {
            return Err(PlaceError::PrecisionInsufficient);
        }
        disks.push(RootDisk { center: z[i], radius });
    }
    for i in 0..d {
        for j in 0..i {
            if (disks[i].center - disks[j].center).norm() <= disks[i].radius + disks[j].radius {
                return Err(PlaceError::PrecisionInsufficient);
            }
        }
    }
    // A disk meeting the real axis holds a real root when its mirror image
    // meets no other disk: the conjugate root then lies in the same disk.
    let snapshot = disks.clone();
    for (i, disk) in disks.iter_mut().enumerate() {
        let zi = snapshot[i].center;
        if zi.im != 0.0 && zi.im.abs() <= snapshot[i].radius {
            let mirror = zi.conj();
            let clear = snapshot
                .iter()
                .enumerate()
                .all(|(k, other)| k == i || (other.center - mirror).norm() > other.radius + snapshot[i].radius);
            if clear {
                disk.radius += zi.im.abs();
                disk.center = Complex64::new(zi.re, 0.0);
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            if (disks[i].center - disks[j].center).norm() <= disks[i].radius + disks[j].radius {
                return Err(PlaceError::PrecisionInsufficient);
            }
        }
    }
    Ok(disks)
}

/// `log` of the Mahler measure `|a_d| prod max(1, |z_i|)`, with an absolute error bound.
pub fn log_mahler_measure(f: &IntPoly) -> Result<(f64, f64), PlaceError> {
    let lead = f.leading();
    let lead_ln = super::ln_abs_int(&lead);
    let disks = isolate_roots(f)?;
    let mut value = lead_ln;
    let mut err = 0.0;
    for disk in &disks {
        let r = disk.center.norm();
        if r > 1.0 {
            value += r.ln();
            err += disk.radius / (r - disk.radius).max(1e-300);
        } else if r + disk.radius > 1.0 {
            err += (r + disk.radius).ln();
        }
    }
    Ok((value, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two_roots_ordered() {
        let f = IntPoly::from_i64s(&[-2, 0, 1]);
        let r = isolate_roots(&f).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r[0].is_real() && r[1].is_real());
        assert!(r[0].contains(Complex64::new(-std::f64::consts::SQRT_2, 0.0)));
        assert!(r[1].contains(Complex64::new(std::f64::consts::SQRT_2, 0.0)));
        assert!(r[1].radius < 1e-14);
    }

    #[test]
    fn complex_pairs_sorted_by_imaginary_part() {
        // t^2 + 1
        let r = isolate_roots(&IntPoly::from_i64s(&[1, 0, 1])).unwrap();
        assert_eq!(r[0].center.re, r[1].center.re);
        assert!(r[0].center.im < 0.0 && r[1].center.im > 0.0);
        // t^3 - 2: one real root then a conjugate pair with negative real part
        let r = isolate_roots(&IntPoly::from_i64s(&[-2, 0, 0, 1])).unwrap();
        assert!(r[2].is_real());
        assert!((r[2].center.re - 2f64.cbrt()).abs() < 1e-14);
        assert!(r[0].center.im < 0.0);
    }

    #[test]
    fn refinement_never_grows_radii() {
        let f = IntPoly::from_i64s(&[1, 0, -10, 0, 1]);
        let base = isolate_roots(&f).unwrap();
        let refined = isolate_roots_refined(&f, 4).unwrap();
        for (a, b) in base.iter().zip(&refined) {
            assert!(b.radius <= a.radius);
            assert!((a.center - b.center).norm() <= a.radius);
        }
    }

    #[test]
    fn mahler_measure_of_cyclotomic_and_quadratic() {
        let (m, err) = log_mahler_measure(&IntPoly::from_i64s(&[1, 1, 1])).unwrap();
        assert!(m.abs() <= err + 1e-12);
        let (m, _) = log_mahler_measure(&IntPoly::from_i64s(&[-2, 0, 1])).unwrap();
        assert!((m - 2f64.ln()).abs() < 1e-12);
        // 3t - 2: Mahler measure 3
        let (m, _) = log_mahler_measure(&IntPoly::from_i64s(&[-2, 3])).unwrap();
        assert!((m - 3f64.ln()).abs() < 1e-12);
    }
}
