use sonospace_core::param::ParamSnapshot;

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Describes the first field where the snapshots differ by more than `tol`.
pub fn snapshot_mismatch(got: &ParamSnapshot, want: &ParamSnapshot, tol: f64) -> Option<String> {
    if got.per_emitter.len() != want.per_emitter.len() {
        return Some(format!(
            "emitter count {} != {}",
            got.per_emitter.len(),
            want.per_emitter.len()
        ));
    }
    for (g, w) in got.per_emitter.iter().zip(&want.per_emitter) {
        if g.emitter_id != w.emitter_id {
            return Some(format!("emitter order {} != {}", g.emitter_id, w.emitter_id));
        }
        let fields = [
            ("dMix", g.d_mix, w.d_mix),
            ("rMix", g.r_mix, w.r_mix),
            ("tMix", g.t_mix, w.t_mix),
            ("rTotal", g.r_total, w.r_total),
            ("tTotal", g.t_total, w.t_total),
        ];
        for (name, a, b) in fields {
            if !close(a, b, tol) {
                return Some(format!("{}.{name}: {a} != {b}", g.emitter_id));
            }
        }
        if g.materials.len() != w.materials.len() {
            return Some(format!("{}: material count differs", g.emitter_id));
        }
        for (gm, wm) in g.materials.iter().zip(&w.materials) {
            if gm.material_id != wm.material_id
                || !close(gm.r_mix, wm.r_mix, tol)
                || !close(gm.t_mix, wm.t_mix, tol)
            {
                return Some(format!("{}.{}: {gm:?} != {wm:?}", g.emitter_id, gm.material_id));
            }
        }
    }
    None
}
