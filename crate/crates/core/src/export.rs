//! CSV writers with a fixed column order.
//!
//! Reals are written in plain decimal notation with 12 significant digits.

use std::fmt::Write;

use crate::counting::CountSeries;
use crate::pointer::PointerSample;

pub const POINTER_HEADER: &str = "G,P_plus,R";
pub const COUNTS_HEADER: &str = "setting,T,analytic_p,counts,trials,seed";

/// Decimal rendering with 12 significant digits.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.00000000000".to_string();
    }
    // Round first so the exponent reflects any carry (9.99...95 -> 10).
    let sci = format!("{:.11e}", x);
    let exp: i32 = sci
        .split_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    let decimals = (11 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

pub fn pointer_csv(samples: &[PointerSample]) -> String {
    let mut out = String::from(POINTER_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_sig(s.g),
            format_sig(s.p_plus),
            format_sig(s.r)
        );
    }
    out
}

/// `loss_column` appends `loss = 1 - T`.
pub fn counts_csv(series: &CountSeries, loss_column: bool) -> String {
    let mut out = String::from(COUNTS_HEADER);
    if loss_column {
        out.push_str(",loss");
    }
    out.push('\n');
    for (i, ((t, p), c)) in series
        .values
        .iter()
        .zip(&series.analytic)
        .zip(&series.counts)
        .enumerate()
    {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            i,
            format_sig(*t),
            format_sig(*p),
            c,
            series.trials,
            series.seed
        );
        if loss_column {
            let _ = write!(out, ",{}", format_sig(1.0 - t));
        }
        out.push('\n');
    }
    out
}
