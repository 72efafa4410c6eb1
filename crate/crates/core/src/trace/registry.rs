use std::collections::BTreeMap;

use super::{DepthConstant, DepthExpr};

/// A named depth formula, both as stated (over composite symbols) and
/// expanded to base constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    pub name: &'static str,
    pub statement: &'static str,
    pub expanded: DepthExpr,
}

fn base(terms: &[(DepthConstant, u64)]) -> DepthExpr {
    DepthExpr::from_terms(terms)
}

/// Compositional Mamba depth: both projections, the 1-D convolution, two
/// activation steps, the selective SSM and the gate product.
pub fn compositional_mamba(registry: &BTreeMap<&'static str, Formula>) -> DepthExpr {
    use DepthConstant::*;
    let g = |k: &str| registry[k].expanded;
    base(&[(Std, 1), (Oplus, 1)]).scale(2)
        + g("d_1dconv")
        + base(&[(Exp, 1), (Std, 1)]).scale(2)
        + g("d_SSM")
        + base(&[(Std, 1)])
}

/// Every stated depth formula. Composite entries are built from the ones
/// before them, so the expansion follows the statements literally.
pub fn formula_registry() -> BTreeMap<&'static str, Formula> {
    use DepthConstant::*;
    let mut r: BTreeMap<&'static str, Formula> = BTreeMap::new();
    let put = |r: &mut BTreeMap<&'static str, Formula>, name, statement, e: DepthExpr| {
        r.insert(name, Formula { name, statement, expanded: e.expand() });
    };

    put(&mut r, "d_matmul", "d_std + d_oplus", base(&[(Std, 1), (Oplus, 1)]));
    put(&mut r, "d_hadamard", "d_std", base(&[(Std, 1)]));
    put(&mut r, "d_log", "2·d_oplus + 2·d_otimes + 3·d_std", base(&[(Oplus, 2), (Otimes, 2), (Std, 3)]));
    let log = r["d_log"].expanded;
    put(&mut r, "d_sp", "d_exp + d_std + d_log", base(&[(Exp, 1), (Std, 1)]) + log);
    put(&mut r, "d_silu", "d_exp + d_std", base(&[(Exp, 1), (Std, 1)]));
    put(&mut r, "d_disc", "5·d_std + 2·d_exp + d_oplus", base(&[(Std, 5), (Exp, 2), (Oplus, 1)]));
    put(&mut r, "d_h", "2·d_std + d_oplus", base(&[(Std, 2), (Oplus, 1)]));
    put(&mut r, "d_k", "d_otimes + 2·d_std + 2·d_oplus", base(&[(Otimes, 1), (Std, 2), (Oplus, 2)]));
    put(&mut r, "d_1dconv", "2·d_std + 2·d_oplus", base(&[(Std, 2), (Oplus, 2)]));
    let sp = r["d_sp"].expanded;
    put(&mut r, "d_select", "2·d_std + d_oplus + d_dup + d_sp", base(&[(Std, 2), (Oplus, 1), (Dup, 1)]) + sp);
    let h = r["d_h"].expanded;
    put(&mut r, "d_recur", "d_h + (d_std + d_oplus)", h + base(&[(Std, 1), (Oplus, 1)]));
    put(&mut r, "d_conv", "d_std + 2·d_oplus", base(&[(Std, 1), (Oplus, 2)]));
    let ssm = r["d_select"].expanded + r["d_disc"].expanded + r["d_recur"].expanded;
    put(&mut r, "d_SSM", "d_select + d_disc + d_recur", ssm);
    let mamba = r["d_1dconv"].expanded + base(&[(Exp, 1)]) + r["d_select"].expanded;
    put(&mut r, "d_mamba", "d_1dconv + d_exp + d_select", mamba);
    let comp = compositional_mamba(&r);
    put(&mut r, "d_mamba_compositional", "2·(d_std + d_oplus) + d_1dconv + 2·(d_exp + d_std) + d_SSM + d_std", comp);
    r
}
