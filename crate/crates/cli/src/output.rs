//! CSV and raster writers. Floats use Rust's shortest round-trip formatting.

use std::fmt::Write as _;

use beltflow::experiments::ErrorReport;
use beltflow::solver::{ArcGrid, NetworkState};

pub const FIELDS_HEADER: &str = "arc_id,x,t,rho";

/// One row per cell and snapshot: `arc_id,x,t,rho`.
pub fn fields_csv(grids: &[ArcGrid], states: &[NetworkState]) -> String {
    let mut out = String::from(FIELDS_HEADER);
    out.push('\n');
    for state in states {
        for g in grids {
            for (j, rho) in state.fields[&g.arc_id].iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{}", g.arc_id, g.center(j), state.time, rho);
            }
        }
    }
    out
}

/// Pointwise comparison rows `arc_id,x,t,numeric,analytic,diff`.
pub fn compare_csv(rows: &[(String, f64, f64, f64, f64)]) -> String {
    let mut out = String::from("arc_id,x,t,numeric,analytic,diff\n");
    for (id, x, t, num, exact) in rows {
        let _ = writeln!(out, "{id},{x},{t},{num},{exact},{}", num - exact);
    }
    out
}

pub fn study_csv(reports: &[ErrorReport]) -> String {
    let mut out = String::from("dx,dt,delta,l2_error,mean_square_error,runtime_s\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.3}",
            r.dx, r.dt, r.delta, r.l2_error, r.mean_square_error, r.runtime_seconds
        );
    }
    out
}

/// Binary graymap of one arc: rows are snapshots (top is `t = 0`), columns
/// are cells. Density 0 is white and `upper` is black.
pub fn raster_pgm(arc: &ArcGrid, states: &[NetworkState], upper: f64) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", arc.n_cells, states.len()).into_bytes();
    for state in states {
        out.extend(state.fields[&arc.arc_id].iter().map(|&rho| {
            let level = (rho / upper).clamp(0.0, 1.0);
            255 - (level * 255.0).round() as u8
        }));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use beltflow::network::{ArcId, BeltArc, Interval};
    use std::collections::BTreeMap;

    fn setup() -> (ArcGrid, Vec<NetworkState>) {
        let grid = ArcGrid::new(&BeltArc::new("a", Interval::new(0.0, 1.0), 1.0, 1.0), 0.5);
        let state = |t: f64, v: Vec<f64>| NetworkState {
            step: 0,
            time: t,
            fields: BTreeMap::from([(ArcId::new("a"), v)]),
            inflow: 0.0,
            outflow: 0.0,
        };
        (
            grid,
            vec![state(0.0, vec![0.0, 1.01]), state(0.1, vec![0.505, 2.0])],
        )
    }

    #[test]
    fn fields_rows() {
        let (g, s) = setup();
        assert_eq!(
            fields_csv(&[g], &s),
            "arc_id,x,t,rho\na,0.25,0,0\na,0.75,0,1.01\na,0.25,0.1,0.505\na,0.75,0.1,2\n"
        );
    }

    #[test]
    fn raster_levels() {
        let (g, s) = setup();
        let img = raster_pgm(&g, &s, 1.01);
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&img[..header.len()], header);
        assert_eq!(&img[header.len()..], &[255, 0, 127, 0]);
    }

    #[test]
    fn empty_study_has_header() {
        assert_eq!(
            study_csv(&[]),
            "dx,dt,delta,l2_error,mean_square_error,runtime_s\n"
        );
    }
}
