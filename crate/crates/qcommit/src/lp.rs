//! Day-ahead unit commitment of one profile day as a CPLEX LP-format MILP.
//!
//! Variables per unit `g` and period `t`: `p_g_t` (MW), binaries `u_g_t`,
//! `su_g_t`, `sd_g_t`; per period: `shed_t` and `spill_t` (MW). The
//! network is ignored, matching the day-ahead environment's single
//! balance.

use std::fmt::Write as _;

use qcommit_core::grid::GridCase;
use qcommit_core::Result;

pub fn export_lp(case: &GridCase, day: usize) -> Result<String> {
    let periods = case.periods();
    let units = &case.units;
    let mut s = String::new();
    let _ = writeln!(s, "\\ {} day {day}", case.meta.name);
    s.push_str("Minimize\n obj:");
    for t in 0..periods {
        for (g, u) in units.iter().enumerate() {
            let _ = write!(s, " + {} p_{g}_{t} + {} su_{g}_{t}", u.cost, u.startup_cost);
        }
        let _ = write!(s, " + {c} shed_{t} + {c} spill_{t}", c = case.costs.c_ls);
    }
    s.push_str("\nSubject To\n");
    for t in 0..periods {
        let net = case.load_forecast(day, t)?.iter().sum::<f64>()
            - case.renewable_forecast(day, t)?.iter().sum::<f64>();
        let _ = write!(s, " bal_{t}:");
        for g in 0..units.len() {
            let _ = write!(s, " + p_{g}_{t}");
        }
        let _ = writeln!(s, " + shed_{t} - spill_{t} = {net}");
        for (g, u) in units.iter().enumerate() {
            let _ = writeln!(s, " pmin_{g}_{t}: p_{g}_{t} - {} u_{g}_{t} >= 0", u.p_min);
            let _ = writeln!(s, " pmax_{g}_{t}: p_{g}_{t} - {} u_{g}_{t} <= 0", u.p_max);
            if t > 0 {
                let p = t - 1;
                // Start-ups and shut-downs are exempt, as in the dispatch.
                let _ = writeln!(s, " rup_{g}_{t}: p_{g}_{t} - p_{g}_{p} - {} su_{g}_{t} <= {}", u.p_max, u.ramp_up);
                let _ = writeln!(s, " rdn_{g}_{t}: p_{g}_{p} - p_{g}_{t} - {} sd_{g}_{t} <= {}", u.p_max, -u.ramp_down);
                let _ = writeln!(
                    s,
                    " sw_{g}_{t}: u_{g}_{t} - u_{g}_{p} - su_{g}_{t} + sd_{g}_{t} = 0"
                );
            } else {
                let init = if u.initial_status { 1 } else { 0 };
                let _ = writeln!(
                    s,
                    " sw_{g}_{t}: u_{g}_{t} - su_{g}_{t} + sd_{g}_{t} = {init}"
                );
            }
            let _ = writeln!(s, " ex_{g}_{t}: su_{g}_{t} + sd_{g}_{t} <= 1");
        }
    }
    s.push_str("Bounds\n");
    for t in 0..periods {
        for g in 0..units.len() {
            let _ = writeln!(s, " p_{g}_{t} >= 0");
        }
        let _ = writeln!(s, " shed_{t} >= 0\n spill_{t} >= 0");
    }
    s.push_str("Binaries\n");
    for t in 0..periods {
        for g in 0..units.len() {
            let _ = writeln!(s, " u_{g}_{t} su_{g}_{t} sd_{g}_{t}");
        }
    }
    s.push_str("End\n");
    Ok(s)
}
