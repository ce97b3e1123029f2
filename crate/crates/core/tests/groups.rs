mod common;

use common::{instance, INSTANCES};
use pgsat::cover::{select_cover, Disposition};
use pgsat::actions::StaticHandling;
use pgsat::mutex::{check_mutex, infer_groups, MutexVerdict};
use pgsat::search::StateSpace;

#[test]
fn selected_groups_hold_in_every_reachable_state() {
    for inst in &INSTANCES {
        let p = inst.load();
        let space = StateSpace::explore(&p, 1_000_000);
        assert!(space.complete, "{}", inst.name);
        for pp in [true, false] {
            let cover = select_cover(&p, &infer_groups(&p), pp);
            assert!(!cover.selected.is_empty(), "{}", inst.name);
            for g in &cover.selected {
                assert_eq!(check_mutex(g, &space), MutexVerdict::Holds, "{} {:?}", inst.name, g.facts);
            }
        }
    }
}

#[test]
fn pruning_drops_visited_except_goal_facts() {
    for name in ["visitall/p01", "visitall/p02"] {
        let p = instance(name).load();
        let visited = p.predicate_id("visited").unwrap();
        let statics = StaticHandling::compute(&p);
        let cover = select_cover(&p, &infer_groups(&p), true);
        assert_eq!(cover.pruned_predicates.iter().copied().collect::<Vec<_>>(), vec![visited]);
        assert_eq!(cover.disposition(&statics, visited), Disposition::Pruned);
        let kept: Vec<_> = cover.uncovered.iter().filter(|f| f.pred == visited).cloned().collect();
        let goals: Vec<_> = p.goal.iter().filter(|f| f.pred == visited).cloned().collect();
        assert_eq!(kept, goals);
    }
}
