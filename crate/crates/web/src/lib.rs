//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes plain numbers and strings and returns a JSON string, so
//! the page needs nothing beyond the generated glue.

use qrg_core::bank::Thresholds;
use qrg_core::clonesim::{CloneParams, StrategyId};
use qrg_core::cracker::{batches_from_log, recover, salt_space, score_all};
use qrg_core::harness::{simulate_sniffing, transaction_stats, RunConfig};
use qrg_core::infotheory::{fidelity_grid, trade_off_curve, CurvePoint};
use qrg_core::mint::{EncodingSpec, HashId};
use qrg_core::rng::SeedRoot;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const BINS: usize = 40;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string(v).expect("plain data serialises")
}

pub fn curve(
    strategy: &str,
    success: f64,
    points: usize,
    conditional: bool,
) -> qrg_core::Result<Vec<CurvePoint>> {
    let st: StrategyId = strategy.parse()?;
    trade_off_curve(st, success, &fidelity_grid(points.max(2)), conditional)
}

/// Mutual information against bank error rate for one strategy.
#[wasm_bindgen(js_name = tradeOffCurve)]
pub fn trade_off_curve_json(
    strategy: &str,
    success: f64,
    points: usize,
    conditional: bool,
) -> Result<String, JsError> {
    curve(strategy, success, points, conditional)
        .map(|c| to_json(&c))
        .map_err(js_err)
}

#[derive(Debug, Serialize)]
pub struct RecoveryDemo {
    pub found: bool,
    pub recovered_salt: String,
    pub pairs_consumed: usize,
    pub constraints: usize,
    pub true_rate: f64,
    pub wrong_mean: f64,
    pub wrong_max: f64,
    /// Counts of wrong-salt agreement rates in equal bins over [0, 1].
    pub histogram: Vec<usize>,
}

pub fn recovery(
    hash: &str,
    salt: &str,
    fidelity: f64,
    success: f64,
    serials: usize,
    seed: u64,
) -> qrg_core::Result<RecoveryDemo> {
    let hash: HashId = hash.parse()?;
    let mut cfg = RunConfig {
        seed,
        clone: CloneParams::new(fidelity, success)?,
        encoding: EncodingSpec::new(hash, salt)?,
        serials,
        ..RunConfig::default()
    };
    cfg.salt_digits = salt.len() as u32;
    let run = simulate_sniffing(&cfg, cfg.root())?;
    let batches = batches_from_log(&run.records);
    let salts = salt_space(cfg.salt_digits);
    let result = recover(&batches, &[hash], &salts, &cfg.encoding, &cfg.recovery)?;
    let scores = score_all(&batches, &[hash], &salts, &cfg.encoding)?;

    let mut histogram = vec![0; BINS];
    let (mut true_rate, mut sum, mut max, mut n) = (0.0, 0.0, 0f64, 0usize);
    for s in &scores {
        if s.salt == salt {
            true_rate = s.rate();
            continue;
        }
        histogram[((s.rate() * BINS as f64) as usize).min(BINS - 1)] += 1;
        sum += s.rate();
        max = max.max(s.rate());
        n += 1;
    }
    Ok(RecoveryDemo {
        found: result.found,
        recovered_salt: result.spec.salt,
        pairs_consumed: result.pairs_consumed,
        constraints: batches.iter().map(|b| b.constraints.len()).sum(),
        true_rate,
        wrong_mean: if n == 0 { 0.0 } else { sum / n as f64 },
        wrong_max: max,
        histogram,
    })
}

/// Sniffs `serials` cards, searches the salt space and reports how the
/// true salt's agreement rate stands against every wrong one.
#[wasm_bindgen(js_name = recoverSalt)]
pub fn recover_salt_json(
    hash: &str,
    salt: &str,
    fidelity: f64,
    success: f64,
    serials: usize,
    seed: u64,
) -> Result<String, JsError> {
    recovery(hash, salt, fidelity, success, serials, seed)
        .map(|r| to_json(&r))
        .map_err(js_err)
}

#[derive(Debug, Serialize)]
pub struct StealthDemo {
    pub transactions: usize,
    pub acceptance: f64,
    pub mean_error_rate: f64,
    pub mean_loss_rate: f64,
}

pub fn stealth(
    strategy: &str,
    fidelity: f64,
    success: f64,
    max_error: f64,
    max_loss: f64,
    tokens: usize,
    seed: u64,
) -> qrg_core::Result<StealthDemo> {
    let st = match strategy {
        "honest" => None,
        s => Some(s.parse::<StrategyId>()?),
    };
    let spec = EncodingSpec::new(HashId::HmacSha256, "000")?;
    let stats = transaction_stats(
        st,
        CloneParams::new(fidelity, success)?,
        &spec,
        Thresholds::new(max_error, max_loss)?,
        tokens,
        SeedRoot(seed),
    )?;
    Ok(StealthDemo {
        transactions: stats.transactions,
        acceptance: stats.acceptance(),
        mean_error_rate: stats.mean_error_rate,
        mean_loss_rate: stats.mean_loss_rate,
    })
}

/// How often the bank accepts cards answered by a given terminal.
#[wasm_bindgen(js_name = terminalStealth)]
pub fn terminal_stealth_json(
    strategy: &str,
    fidelity: f64,
    success: f64,
    max_error: f64,
    max_loss: f64,
    tokens: usize,
    seed: u64,
) -> Result<String, JsError> {
    stealth(
        strategy, fidelity, success, max_error, max_loss, tokens, seed,
    )
    .map(|s| to_json(&s))
    .map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_endpoints() {
        let c = curve("ii", 1.0, 11, false).unwrap();
        assert_eq!(c.len(), 11);
        assert!((c.last().unwrap().info_bits - 0.75).abs() < 1e-12);
        assert_eq!(curve("iii", 1.0, 11, false).unwrap().len(), 1);
        assert!(curve("iv", 1.0, 11, false).is_err());
    }

    #[test]
    fn recovery_finds_salt() {
        let r = recovery("sha256", "271", 0.803, 1.0 / 3.0, 40, 1).unwrap();
        assert!(r.found);
        assert_eq!(r.recovered_salt, "271");
        assert_eq!(r.histogram.iter().sum::<usize>(), 999);
        assert!(r.true_rate > r.wrong_max);
    }

    #[test]
    fn honest_terminal_always_accepted() {
        let s = stealth("honest", 0.803, 1.0 / 3.0, 0.25, 0.75, 200, 3).unwrap();
        assert_eq!(s.acceptance, 1.0);
        let s = stealth("ii", 0.803, 1.0, 0.25, 0.75, 500, 3).unwrap();
        assert!(s.acceptance > 0.7 && s.acceptance < 0.95);
        assert!(stealth("ii", 2.0, 1.0, 0.25, 0.75, 5, 3).is_err());
    }
}
