use crate::datalog::{DatalogProgram, Evaluator};
use crate::error::{Budget, Result};
use crate::structure::{enumerate_structures, hom_search, Structure};

/// The first structure with at most `size_bound` elements (iso
/// representatives, in enumeration order) on which `p` derives goal while
/// it maps homomorphically to `b`.
pub fn soundness_check(
    p: &DatalogProgram,
    b: &Structure,
    size_bound: usize,
    budget: Budget,
) -> Result<Option<Structure>> {
    p.edb().ensure_same(b.signature())?;
    let ev = Evaluator::new(p)?;
    for a in enumerate_structures(b.signature(), size_bound, true, budget)? {
        if ev.derives_goal(&a)? && hom_search(&a, b)?.is_some() {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datalog::parse_program;
    use crate::lab::template;
    use crate::structure::DEFAULT_ENUMERATION_BUDGET;

    #[test]
    fn edge_goal_against_loop_template() {
        let p = parse_program("#edb E/2\n#idb goal/0\ngoal :- E(x,y).\n").unwrap();
        let cex = soundness_check(&p, &template("loop").unwrap(), 3, DEFAULT_ENUMERATION_BUDGET)
            .unwrap()
            .expect("unsound");
        assert_eq!(cex.size(), 1);
        assert!(cex.holds("E", &[0, 0]));
        assert!(soundness_check(&p, &template("edgeless1").unwrap(), 3, DEFAULT_ENUMERATION_BUDGET)
            .unwrap()
            .is_none());
    }

    #[test]
    fn goal_free_program_is_sound() {
        let p = parse_program("#edb E/2\n#idb goal/0\n").unwrap();
        assert!(soundness_check(&p, &template("loop").unwrap(), 3, DEFAULT_ENUMERATION_BUDGET)
            .unwrap()
            .is_none());
    }
}
