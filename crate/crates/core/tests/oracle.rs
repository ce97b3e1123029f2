mod common;

use common::INSTANCES;
use pgsat::search::{bfs_oracle, bfs_plan, OracleResult};
use pgsat::plan::{validate, Plan};

#[test]
fn hand_optima_match_breadth_first_search() {
    for inst in &INSTANCES {
        let p = inst.load();
        assert_eq!(bfs_oracle(&p, 1_000_000), OracleResult::Optimal(inst.optimum), "{}", inst.name);
        let plan = Plan::new(bfs_plan(&p, 1_000_000).unwrap().unwrap());
        assert!(validate(&plan, &p).is_ok(), "{}", inst.name);
    }
}
