//! Geodesic integration, solution sheets over rectangular parameter grids,
//! and finite-difference residuals of the overdetermined Newton system.
//!
//! No general solver for k > 1 is attempted. Sheets come from closed-form
//! families (affine, quadratic, rank-1 geodesic) or from the user, and are
//! checked against the equations node by node.

mod geodesic;
mod io;
mod residual;
mod sheet;

pub use geodesic::{exp_displacement, exp_map, integrate_geodesic, rank1_sheet, GeodesicPath};
pub use io::{emit_sheet, read_sheet};
pub use residual::{
    compatibility_defect, newton_residual, sheet_prolong, sheet_prolong2, sopde_residual,
    NodeResidual, SheetResidual,
};
pub use sheet::{flat_newton_sheet, Grid, Sheet};
