#include "fleetsim/demand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "fleetsim/errors.hpp"
#include "fleetsim/random.hpp"
#include "text_util.hpp"

namespace fleetsim {

namespace {

constexpr int kMaxPairRetries = 1000;

std::vector<double> prefix_sums(const std::vector<double>& w) {
  std::vector<double> out(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    out[i] = acc;
  }
  return out;
}

bool looks_like_header(const std::vector<std::string>& fields) {
  try {
    detail::to_double(fields[0]);
    return false;
  } catch (const std::invalid_argument&) {
    return true;
  }
}

}  // namespace

const char* to_string(OrderState s) {
  switch (s) {
    case OrderState::Waiting: return "Waiting";
    case OrderState::Assigned: return "Assigned";
    case OrderState::InTransit: return "InTransit";
    case OrderState::Delivered: return "Delivered";
    case OrderState::Dropped: return "Dropped";
  }
  return "?";
}

void DemandProfile::validate() const {
  if (!(bin_width_s > 0.0)) throw DegenerateProfile("bin width must be positive");
  if (bin_weights.empty()) throw DegenerateProfile("profile has no bins");
  bool any_bin = false;
  for (double w : bin_weights) {
    if (w < 0.0 || !std::isfinite(w)) throw DegenerateProfile("bin weights must be non-negative");
    any_bin = any_bin || w > 0.0;
  }
  if (!any_bin) throw DegenerateProfile("all bin weights are zero");
  bool any_r = false;
  bool any_d = false;
  for (const auto& s : spatial_weights) {
    if (s.restaurant_w < 0.0 || s.destination_w < 0.0) {
      throw DegenerateProfile("spatial weights must be non-negative");
    }
    any_r = any_r || s.restaurant_w > 0.0;
    any_d = any_d || s.destination_w > 0.0;
  }
  if (!any_r) throw DegenerateProfile("no positive restaurant weight");
  if (!any_d) throw DegenerateProfile("no positive destination weight");
}

std::vector<Order> ingest_orders(std::istream& in, const RoadNetwork& net) {
  std::vector<Order> orders;
  std::string raw;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::strip_comment(raw);
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    if (first && looks_like_header(fields)) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 4) throw ParseError("<orders>", line_no, "order row needs 4 fields");
    Order o;
    try {
      o.placed_at_s = detail::to_double(fields[1]);
      o.restaurant_node = detail::to_int(fields[2]);
      o.destination_node = detail::to_int(fields[3]);
    } catch (const std::invalid_argument& e) {
      throw ParseError("<orders>", line_no, e.what());
    }
    if (o.placed_at_s < 0.0) throw NegativeTime(line_no);
    if (!net.contains(o.restaurant_node)) throw UnknownNode(o.restaurant_node, line_no);
    if (!net.contains(o.destination_node)) throw UnknownNode(o.destination_node, line_no);
    if (o.restaurant_node == o.destination_node) throw SameOriginDestination(line_no);
    o.id = static_cast<OrderId>(orders.size());
    orders.push_back(o);
  }
  std::stable_sort(orders.begin(), orders.end(),
                   [](const Order& a, const Order& b) { return a.placed_at_s < b.placed_at_s; });
  return orders;
}

std::vector<Order> ingest_orders(const std::filesystem::path& file, const RoadNetwork& net) {
  std::ifstream in(file);
  if (!in) throw ParseError(file.string(), 0, "cannot open file");
  return ingest_orders(in, net);
}

void write_orders_csv(std::ostream& out, const std::vector<Order>& orders) {
  out << "order_id,placed_at_s,restaurant_node,destination_node\n";
  for (const auto& o : orders) {
    out << o.id << ',' << std::setprecision(15) << o.placed_at_s << ',' << o.restaurant_node << ','
        << o.destination_node << '\n';
  }
}

std::vector<Order> generate_synthetic(const DemandProfile& profile, std::uint64_t seed) {
  profile.validate();
  Rng rng(seed);
  const auto bin_cdf = prefix_sums(profile.bin_weights);
  std::vector<double> rw;
  std::vector<double> dw;
  for (const auto& s : profile.spatial_weights) {
    rw.push_back(s.restaurant_w);
    dw.push_back(s.destination_w);
  }
  const auto r_cdf = prefix_sums(rw);
  const auto d_cdf = prefix_sums(dw);

  std::vector<Order> orders;
  orders.reserve(profile.total_orders);
  for (std::size_t i = 0; i < profile.total_orders; ++i) {
    const auto bin = rng.categorical(bin_cdf);
    const double offset = std::floor(rng.uniform() * profile.bin_width_s);
    Order o;
    o.placed_at_s = static_cast<double>(bin) * profile.bin_width_s + offset;
    int tries = 0;
    do {
      if (++tries > kMaxPairRetries) {
        throw DegenerateProfile("could not draw distinct restaurant/destination nodes");
      }
      o.restaurant_node = profile.spatial_weights[rng.categorical(r_cdf)].node;
      o.destination_node = profile.spatial_weights[rng.categorical(d_cdf)].node;
    } while (o.restaurant_node == o.destination_node);
    orders.push_back(o);
  }
  std::stable_sort(orders.begin(), orders.end(),
                   [](const Order& a, const Order& b) { return a.placed_at_s < b.placed_at_s; });
  for (std::size_t i = 0; i < orders.size(); ++i) orders[i].id = static_cast<OrderId>(i);
  return orders;
}

DemandProfile parse_profile(std::istream& in, const std::string& source) {
  DemandProfile p;
  std::string raw;
  std::size_t line_no = 0;
  bool have_width = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::strip_comment(raw);
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    try {
      if (!have_width) {
        if (fields.size() != 1) throw ParseError(source, line_no, "first record must be bin_width_s");
        p.bin_width_s = detail::to_double(fields[0]);
        have_width = true;
      } else if (fields.size() == 1) {
        p.bin_weights.push_back(detail::to_double(fields[0]));
      } else if (fields.size() == 2 && fields[0] == "total_orders") {
        p.total_orders = static_cast<std::size_t>(detail::to_int(fields[1]));
      } else if (fields.size() == 3) {
        p.spatial_weights.push_back(
            {detail::to_int(fields[0]), detail::to_double(fields[1]), detail::to_double(fields[2])});
      } else {
        throw ParseError(source, line_no, "unrecognized profile record");
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (!have_width) throw ParseError(source, line_no, "empty profile");
  return p;
}

DemandProfile load_profile(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file.string(), 0, "cannot open file");
  return parse_profile(in, file.string());
}

void check_profile_nodes(const DemandProfile& profile, const RoadNetwork& net) {
  for (const auto& s : profile.spatial_weights) {
    if (!net.contains(s.node)) throw UnknownNode(s.node);
  }
}

}  // namespace fleetsim
