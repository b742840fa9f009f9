//! Seeded code/noise constructions with known correctability structure.

use rand::Rng;

use crate::channel::noise;
use crate::channel::KrausChannel;
use crate::code::SubsystemCode;
use crate::error::{Error, Result};
use crate::operator::{tensor, Operator};
use crate::random::{haar_isometry, haar_unitary};

fn rows(m: &Operator, start: usize, count: usize) -> Operator {
    Operator::from(m.rows_range(start..start + count).into_owned())
}

/// Noise under which A is perfectly correctable, built in sector form:
/// `E_kl = W_k (I_A ⊗ C_kl) V^dag` with isometries `W_k` of mutually orthogonal
/// range and `Σ C_kl^dag C_kl = I_B`, then remixed by a Haar unitary.
pub fn random_correctable_noise<R: Rng + ?Sized>(
    code: &SubsystemCode,
    sectors: usize,
    per_sector: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    let (d_a, d_b, d_h) = (code.d_a(), code.d_b(), code.d_h());
    let block = d_a * d_b;
    if sectors == 0 || per_sector == 0 || sectors * block > d_h {
        return Err(Error::Precondition {
            operation: "random_correctable_noise",
            reason: format!("{sectors} sectors of dimension {block} do not fit in d_h = {d_h}"),
        });
    }
    let w = haar_isometry(d_h, sectors * block, rng);
    let c = haar_isometry(sectors * per_sector * d_b, d_b, rng);
    let id_a = Operator::identity(d_a);
    let v_dag = code.embedding().dagger();
    let mut kraus = Vec::with_capacity(sectors * per_sector);
    for k in 0..sectors {
        let wk = Operator::from(w.columns_range(k * block..(k + 1) * block).into_owned());
        for l in 0..per_sector {
            let ckl = rows(&c, (k * per_sector + l) * d_b, d_b);
            kraus.push(&wk * tensor(&id_a, &ckl) * &v_dag);
        }
    }
    let ch = KrausChannel::new(kraus, code.projector())?;
    let u = haar_unitary(ch.len(), rng);
    ch.remix(&u)
}

/// Noise under which B is perfectly correctable (A may be disturbed arbitrarily).
pub fn random_b_correctable_noise<R: Rng + ?Sized>(
    code: &SubsystemCode,
    sectors: usize,
    per_sector: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    random_correctable_noise(&code.swapped()?, sectors, per_sector, rng)
}

/// Generic noise on the code: `E_k = Y_k V^dag` for a Haar isometry `Y` split
/// into `n` blocks of `d_out` rows.
pub fn random_noise_on_code<R: Rng + ?Sized>(
    code: &SubsystemCode,
    n: usize,
    d_out: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    if n == 0 || n * d_out < code.dim() {
        return Err(Error::Precondition {
            operation: "random_noise_on_code",
            reason: format!("{n} Kraus operators of output dimension {d_out} cannot be trace preserving"),
        });
    }
    let y = haar_isometry(n * d_out, code.dim(), rng);
    let v_dag = code.embedding().dagger();
    let kraus = (0..n).map(|k| rows(&y, k * d_out, d_out) * &v_dag).collect();
    KrausChannel::new(kraus, code.projector())
}

/// Independent amplitude damping on every qubit of the code's register,
/// restricted to the code.
pub fn amplitude_damping_on_code(code: &SubsystemCode, gamma: f64) -> Result<KrausChannel> {
    let n = qubit_count(code.d_h())?;
    let full = noise::independent(&noise::amplitude_damping(gamma)?, n);
    full.restrict(&code.projector())
}

fn qubit_count(d: usize) -> Result<usize> {
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::Precondition { operation: "qubit register", reason: format!("d_h = {d} is not a power of two") });
    }
    Ok(d.trailing_zeros() as usize)
}

/// Physical depolarizing channel of strength `s` on the gauge qubit of the
/// four-qubit gauge code, composed after `base` (both on the 16-dim register).
pub fn gauge422_with_b_depolarizing(code: &SubsystemCode, base: &KrausChannel, s: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Parameter { name: "s", value: s, reason: "must lie in [0, 1]" });
    }
    let (xb, zb) = crate::code::gauge422_b_paulis();
    let yb = &xb * &zb;
    let id = Operator::identity(16);
    let q = s / 4.0;
    let twirl = KrausChannel::from_kraus(vec![
        id.scale((1.0 - 3.0 * q).sqrt()),
        xb.scale(q.sqrt()),
        yb.scale(q.sqrt()),
        zb.scale(q.sqrt()),
    ])?;
    KrausChannel::compose(&twirl, base)?.restrict(&code.projector())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded_rng;
    use crate::recovery::{check_perfect_form_a, check_perfect_form_b, residuals_swapped};

    #[test]
    fn sector_noise_is_correctable_on_a() {
        let mut rng = seeded_rng(3, 0);
        let code = SubsystemCode::random(2, 2, 9, &mut rng).unwrap();
        let noise = random_correctable_noise(&code, 2, 2, &mut rng).unwrap();
        assert!(noise.is_trace_preserving());
        assert!(check_perfect_form_a(&code, &noise, 1e-8).unwrap().0);
        assert!(check_perfect_form_b(&code, &noise, 1e-8).unwrap().passed);
    }

    #[test]
    fn b_sector_noise_is_correctable_on_b() {
        let mut rng = seeded_rng(4, 0);
        let code = SubsystemCode::random(2, 2, 8, &mut rng).unwrap();
        let noise = random_b_correctable_noise(&code, 2, 1, &mut rng).unwrap();
        assert!(residuals_swapped(&code, &noise).unwrap().max_delta_fro < 1e-9);
    }

    #[test]
    fn oversized_sectors_are_rejected() {
        let mut rng = seeded_rng(0, 0);
        let code = SubsystemCode::random(2, 2, 5, &mut rng).unwrap();
        assert!(random_correctable_noise(&code, 2, 1, &mut rng).is_err());
    }

    #[test]
    fn generic_noise_is_tp_on_code() {
        let mut rng = seeded_rng(5, 0);
        let code = SubsystemCode::random(3, 2, 8, &mut rng).unwrap();
        let noise = random_noise_on_code(&code, 3, 8, &mut rng).unwrap();
        assert!((noise.kraus_sum() - code.projector()).fro_norm() < 1e-10);
    }
}
