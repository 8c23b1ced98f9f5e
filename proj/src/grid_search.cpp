#include "udft/grid_search.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "udft/error.hpp"
#include "udft/log.hpp"
#include "udft/parallel.hpp"
#include "udft/pipeline.hpp"

namespace udft {

void GridSpec::validate() const {
  if (n1_values.empty() || n2_values.empty()) throw InvalidArgument("grid needs at least one N1 and one N2");
  for (auto v : n1_values)
    if (v < 1) throw InvalidArgument("grid widths must be >= 1");
  for (auto v : n2_values)
    if (v < 1) throw InvalidArgument("grid widths must be >= 1");
}

const GridCell* GridResult::find(std::size_t n1, std::size_t n2) const {
  for (const auto& c : cells)
    if (c.n1 == n1 && c.n2 == n2) return &c;
  return nullptr;
}

GridResult run_grid(const GridSpec& spec, const FeatureDataset& hr, const FeatureDataset& lr_train,
                    const FeatureDataset& lr_test) {
  spec.validate();
  const std::set<std::size_t> n1s(spec.n1_values.begin(), spec.n1_values.end());
  const std::set<std::size_t> n2s(spec.n2_values.begin(), spec.n2_values.end());

  GridResult result;
  for (auto n1 : n1s)
    for (auto n2 : n2s) result.cells.push_back(GridCell{n1, n2, std::nullopt, {}, 0.0});

  // one clustering per distinct N2
  std::map<std::size_t, std::optional<KMeansModel>> clusterings;
  std::map<std::size_t, std::string> cluster_errors;
  for (auto n2 : n2s) {
    PipelineConfig cfg = spec.base_config;
    cfg.k = n2;
    try {
      clusterings[n2] = fit_clusters(cfg, hr);
    } catch (const std::exception& e) {
      clusterings[n2] = std::nullopt;
      cluster_errors[n2] = std::string("cluster: ") + e.what();
    }
  }

  auto run_cell = [&](GridCell& cell) {
    const auto start = std::chrono::steady_clock::now();
    PipelineConfig cfg = spec.base_config;
    cfg.n1 = cell.n1;
    cfg.k = cell.n2;
    const auto& km = clusterings.at(cell.n2);
    if (!km) {
      cell.error = cluster_errors.at(cell.n2);
    } else {
      try {
        cell.map = run_method(cfg, hr, lr_train, lr_test, &*km).report.map;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
    cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cell.map) log::info("grid: N1=", cell.n1, " N2=", cell.n2, " mAP=", *cell.map, " (", cell.seconds, " s)");
    else log::warn("grid: N1=", cell.n1, " N2=", cell.n2, " failed: ", cell.error);
  };

  const auto n_cells = static_cast<std::ptrdiff_t>(result.cells.size());
  if (spec.parallel_cells && parallel::enabled()) {
#pragma omp parallel for schedule(dynamic) num_threads(parallel::num_threads())
    for (std::ptrdiff_t i = 0; i < n_cells; ++i) run_cell(result.cells[static_cast<std::size_t>(i)]);
  } else {
    for (auto& cell : result.cells) run_cell(cell);
  }

  // cells are sorted by (n1, n2), so the first strict maximum is the tie-break winner
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const auto& c = result.cells[i];
    if (c.map && (!result.best || *c.map > *result.cells[*result.best].map)) result.best = i;
  }
  return result;
}

std::string render_grid(const GridResult& result) {
  std::set<std::size_t> n1s, n2s;
  for (const auto& c : result.cells) {
    n1s.insert(c.n1);
    n2s.insert(c.n2);
  }
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"N2\\N1"};
  for (auto n1 : n1s) header.push_back(std::to_string(n1));
  rows.push_back(header);
  for (auto n2 : n2s) {
    std::vector<std::string> row{std::to_string(n2)};
    for (auto n1 : n1s) {
      const auto* cell = result.find(n1, n2);
      std::string text = "ERR";
      if (cell && cell->map) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", *cell->map);
        text = buf;
        if (result.best && &result.cells[*result.best] == cell) text += "*";
      }
      row.push_back(text);
    }
    rows.push_back(row);
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows)
    for (std::size_t j = 0; j < row.size(); ++j) widths[j] = std::max(widths[j], row[j].size());
  std::ostringstream os;
  for (const auto& row : rows) {
    os << '|';
    for (std::size_t j = 0; j < row.size(); ++j) os << ' ' << std::string(widths[j] - row[j].size(), ' ') << row[j] << " |";
    os << '\n';
  }
  return os.str();
}

std::string render_grid_records(const GridResult& result) {
  std::ostringstream os;
  os << "n1,n2,map,seconds\n";
  for (const auto& c : result.cells) {
    char buf[128];
    if (c.map) std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.3f\n", c.n1, c.n2, *c.map, c.seconds);
    else std::snprintf(buf, sizeof(buf), "%zu,%zu,ERR,%.3f\n", c.n1, c.n2, c.seconds);
    os << buf;
  }
  return os.str();
}

}  // namespace udft
