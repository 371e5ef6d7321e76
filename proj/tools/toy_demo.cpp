// Three-agent toy: PBS on the first query, then exPBS seeded with its
// priorities on the next two.
#include <iostream>

#include "lmapf/lmapf.hpp"

using namespace lmapf;

int main() {
  const GridMap map = load_map("3 5\n....b\n.b...\na.b.a\n");
  const std::vector<Cell> starts{{2, 0}, {2, 4}, {0, 4}};
  const std::vector<Cell> goals{{0, 4}, {0, 1}, {2, 2}};

  LifelongConfig cfg;
  cfg.window = 4;
  cfg.replan = 2;
  cfg.lookahead = 2;
  cfg.agents = 3;
  cfg.total_timesteps = 6;

  for (auto solver : {SolverVariant::rhcr, SolverVariant::exrhcr}) {
    cfg.solver = solver;
    RunReport rep = run_lifelong(cfg, map, std::make_pair(starts, goals));
    std::cout << to_string(solver) << '\n';
    for (const auto& q : rep.queries)
      std::cout << "  q" << q.index << " t=" << q.timestep << " " << to_string(q.solver) << " "
                << to_string(q.status) << " expanded=" << q.stats.pt_nodes_expanded
                << " generated=" << q.stats.pt_nodes_generated
                << " depth=" << q.stats.pt_depth_of_solution << " cost=" << q.cost << '\n';
  }

  WMAPFQuery q0{&map, starts, goals, 4};
  SolveResult r = pbs_solve(q0);
  std::cout << "q0 priorities " << r.seed << '\n';
  for (const auto& p : r.paths) {
    std::cout << "  a" << p.agent << ":";
    for (Cell c : p.cells) std::cout << ' ' << c;
    std::cout << '\n';
  }
}
