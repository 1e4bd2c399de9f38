#include "tacsim/metrics.hpp"

#include "tacsim/errors.hpp"
#include "tacsim/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace tacsim {

namespace fs = std::filesystem;

namespace {

std::string id_text(const MarkerId& id) {
  return "(" + std::to_string(id.row) + "," + std::to_string(id.col) + ")";
}

std::map<MarkerId, const MarkerObservation*> index_frame(const ObservationFrame& frame, const char* label) {
  std::map<MarkerId, const MarkerObservation*> out;
  for (const auto& o : frame) {
    if (!out.emplace(o.id, &o).second) throw PairingError(std::string(label) + ": duplicate marker id " + id_text(o.id));
  }
  return out;
}

// Throws PairingError listing ids present in one frame but not the other.
void require_same_ids(const std::map<MarkerId, const MarkerObservation*>& a,
                      const std::map<MarkerId, const MarkerObservation*>& b, const char* a_label,
                      const char* b_label) {
  std::string missing;
  for (const auto& [id, _] : a)
    if (!b.count(id)) missing += " " + id_text(id) + " missing from " + b_label + ";";
  for (const auto& [id, _] : b)
    if (!a.count(id)) missing += " " + id_text(id) + " missing from " + a_label + ";";
  if (!missing.empty()) {
    missing.pop_back();
    throw PairingError("marker id sets differ:" + missing);
  }
}

struct Accumulator {
  double sq = 0.0;
  double abs = 0.0;
  std::size_t n = 0;
};

void accumulate_displacements(const ObservationFrame& pred0, const ObservationFrame& pred_k,
                              const ObservationFrame& truth0, const ObservationFrame& truth_k, int frame,
                              Accumulator& acc, std::vector<MarkerResidual>* residuals) {
  const auto p0 = index_frame(pred0, "pred frame 0");
  const auto pk = index_frame(pred_k, "pred frame k");
  const auto t0 = index_frame(truth0, "truth frame 0");
  const auto tk = index_frame(truth_k, "truth frame k");
  require_same_ids(p0, pk, "pred frame 0", "pred frame k");
  require_same_ids(t0, tk, "truth frame 0", "truth frame k");
  require_same_ids(pk, tk, "pred", "truth");
  for (const auto& [id, obs] : pk) {
    const Vec2 dp = obs->center - p0.at(id)->center;
    const Vec2 dt = tk.at(id)->center - t0.at(id)->center;
    const Vec2 r = dp - dt;
    const double m = dp.norm() - dt.norm();
    acc.sq += r.squaredNorm();
    acc.abs += std::abs(m);
    ++acc.n;
    if (residuals) residuals->push_back({frame, id, r, m, Vec2::Zero()});
  }
}

void accumulate_shapes(const ObservationFrame& pred, const ObservationFrame& truth, int frame, Accumulator& acc,
                       std::vector<MarkerResidual>* residuals) {
  const auto p = index_frame(pred, "pred");
  const auto t = index_frame(truth, "truth");
  require_same_ids(p, t, "pred", "truth");
  for (const auto& [id, obs] : p) {
    const Vec2 r = obs->rect - t.at(id)->rect;
    acc.sq += r.squaredNorm() / 2.0;
    acc.abs += (std::abs(r.x()) + std::abs(r.y())) / 2.0;
    ++acc.n;
    if (residuals) {
      auto it = std::find_if(residuals->begin(), residuals->end(),
                             [&](const MarkerResidual& m) { return m.frame == frame && m.id == id; });
      if (it != residuals->end()) {
        it->rect = r;
      } else {
        residuals->push_back({frame, id, Vec2::Zero(), 0.0, r});
      }
    }
  }
}

ErrorPair finish(const Accumulator& acc) {
  if (acc.n == 0) return {};
  return {std::sqrt(acc.sq / static_cast<double>(acc.n)), acc.abs / static_cast<double>(acc.n)};
}

}  // namespace

ObservationFrame observations_from_records(std::span<const MarkerRecord> records) {
  ObservationFrame out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.id, r.fit.center, r.fit.bounding_rect()});
  return out;
}

ErrorPair displacement_errors(const ObservationFrame& pred0, const ObservationFrame& pred_k,
                              const ObservationFrame& truth0, const ObservationFrame& truth_k) {
  Accumulator acc;
  accumulate_displacements(pred0, pred_k, truth0, truth_k, 1, acc, nullptr);
  return finish(acc);
}

ErrorPair shape_errors(const ObservationFrame& pred, const ObservationFrame& truth) {
  Accumulator acc;
  accumulate_shapes(pred, truth, 0, acc, nullptr);
  return finish(acc);
}

MetricsReport compare_sequences(std::span<const ObservationFrame> pred, std::span<const ObservationFrame> truth) {
  if (pred.size() != truth.size()) {
    throw PairingError("sequence lengths differ: pred has " + std::to_string(pred.size()) + " frames, truth has " +
                       std::to_string(truth.size()));
  }
  MetricsReport rep;
  Accumulator disp, shape;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const int frame = static_cast<int>(k);
    try {
      if (k > 0) accumulate_displacements(pred[0], pred[k], truth[0], truth[k], frame, disp, &rep.residuals);
      accumulate_shapes(pred[k], truth[k], frame, shape, &rep.residuals);
    } catch (const PairingError& e) {
      throw PairingError("frame " + std::to_string(k) + ": " + e.what());
    }
  }
  const auto d = finish(disp);
  const auto s = finish(shape);
  rep.e_rmse = d.rmse;
  rep.e_mag = d.mag;
  rep.shape_e_rmse = s.rmse;
  rep.shape_e_mag = s.mag;
  return rep;
}

std::vector<MotionAggregate> report(std::span<const LabelledRun> runs) {
  std::vector<MotionAggregate> rows;
  MotionAggregate mean{"mean"};
  std::size_t motions = 0;
  for (auto kind : {MotionKind::Press, MotionKind::Slip, MotionKind::Rotate}) {
    MotionAggregate agg{std::string(to_string(kind))};
    for (const auto& run : runs) {
      if (run.motion != kind) continue;
      MetricsReport r;
      try {
        r = compare_sequences(run.pred, run.truth);
      } catch (const PairingError& e) {
        throw PairingError(run.name + ": " + e.what());
      }
      agg.e_rmse += r.e_rmse;
      agg.e_mag += r.e_mag;
      agg.shape_e_rmse += r.shape_e_rmse;
      agg.shape_e_mag += r.shape_e_mag;
      ++agg.runs;
    }
    if (agg.runs > 0) {
      const double n = static_cast<double>(agg.runs);
      agg.e_rmse /= n;
      agg.e_mag /= n;
      agg.shape_e_rmse /= n;
      agg.shape_e_mag /= n;
      mean.e_rmse += agg.e_rmse;
      mean.e_mag += agg.e_mag;
      mean.shape_e_rmse += agg.shape_e_rmse;
      mean.shape_e_mag += agg.shape_e_mag;
      mean.runs += agg.runs;
      ++motions;
    }
    rows.push_back(agg);
  }
  if (motions > 0) {
    const double n = static_cast<double>(motions);
    mean.e_rmse /= n;
    mean.e_mag /= n;
    mean.shape_e_rmse /= n;
    mean.shape_e_mag /= n;
  }
  rows.push_back(mean);
  return rows;
}

std::string format_report_csv(std::span<const MotionAggregate> rows) {
  std::string out = "motion,metric,value\n";
  for (const auto& r : rows) {
    if (r.runs == 0) continue;
    out += r.label + ",e_rmse," + format_double(r.e_rmse) + "\n";
    out += r.label + ",e_mag," + format_double(r.e_mag) + "\n";
    out += r.label + ",shape_e_rmse," + format_double(r.shape_e_rmse) + "\n";
    out += r.label + ",shape_e_mag," + format_double(r.shape_e_mag) + "\n";
  }
  return out;
}

std::string format_report_summary(std::span<const MotionAggregate> rows) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << "metric        ";
  for (const auto& r : rows) os << "  " << r.label << std::string(r.label.size() < 8 ? 8 - r.label.size() : 0, ' ');
  os << "\n";
  auto line = [&](const char* name, double MotionAggregate::*field) {
    os << name;
    for (const auto& r : rows) {
      os << "  ";
      if (r.runs == 0) {
        os << "     -  ";
      } else {
        os.width(8);
        os << r.*field;
      }
    }
    os << "\n";
  };
  line("e_rmse (px)   ", &MotionAggregate::e_rmse);
  line("e_mag (px)    ", &MotionAggregate::e_mag);
  line("shape rmse(px)", &MotionAggregate::shape_e_rmse);
  line("shape mag (px)", &MotionAggregate::shape_e_mag);
  return os.str();
}

std::vector<ObservationFrame> read_run_observations(const fs::path& run_dir) {
  const fs::path frames = run_dir / "frames";
  std::error_code ec;
  if (!fs::is_directory(frames, ec)) throw MissingFileError(frames.string());
  std::vector<fs::path> tables;
  for (const auto& entry : fs::directory_iterator(frames)) {
    const auto name = entry.path().filename().string();
    if (name.starts_with("frame_") && name.ends_with("_markers.csv")) tables.push_back(entry.path());
  }
  std::sort(tables.begin(), tables.end());
  std::vector<ObservationFrame> out;
  for (const auto& t : tables) {
    try {
      out.push_back(observations_from_records(parse_marker_table(read_text_file(t))));
    } catch (const SchemaError& e) {
      throw SchemaError(t.string(), e.what());
    }
  }
  return out;
}

MotionKind read_run_motion(const fs::path& run_dir) {
  const fs::path manifest = run_dir / "manifest.json";
  std::error_code ec;
  if (!fs::is_regular_file(manifest, ec)) return MotionKind::Press;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(manifest));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(manifest.string() + ": " + e.what(), e.byte);
  }
  if (!doc.contains("motion") || !doc["motion"].is_string()) return MotionKind::Press;
  const auto kind = motion_kind_from_string(doc["motion"].get<std::string>());
  if (!kind) throw SchemaError(manifest.string() + ":motion", "unknown motion");
  return *kind;
}

std::vector<LabelledRun> pair_run_trees(const fs::path& pred_dir, const fs::path& truth_dir) {
  std::error_code ec;
  for (const auto& d : {pred_dir, truth_dir})
    if (!fs::is_directory(d, ec)) throw MissingFileError(d.string());

  auto single = [](const fs::path& d) { return fs::is_directory(d / "frames"); };
  std::vector<LabelledRun> runs;
  if (single(pred_dir) || single(truth_dir)) {
    LabelledRun run;
    run.name = truth_dir.filename().string();
    run.motion = read_run_motion(truth_dir);
    run.pred = read_run_observations(pred_dir);
    run.truth = read_run_observations(truth_dir);
    runs.push_back(std::move(run));
    return runs;
  }

  auto list = [&](const fs::path& d) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(d))
      if (e.is_directory() && single(e.path())) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
  };
  const auto pn = list(pred_dir);
  const auto tn = list(truth_dir);
  if (pn != tn) {
    std::vector<std::string> diff;
    std::set_symmetric_difference(pn.begin(), pn.end(), tn.begin(), tn.end(), std::back_inserter(diff));
    throw PairingError(diff.empty() ? "run trees differ" : "run '" + diff.front() + "' is not present in both trees");
  }
  for (const auto& name : tn) {
    LabelledRun run;
    run.name = name;
    run.motion = read_run_motion(truth_dir / name);
    run.pred = read_run_observations(pred_dir / name);
    run.truth = read_run_observations(truth_dir / name);
    runs.push_back(std::move(run));
  }
  if (runs.empty()) throw MissingFileError(truth_dir.string() + " contains no runs");
  return runs;
}

}  // namespace tacsim
