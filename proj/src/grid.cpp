#include "qsg/grid.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace qsg {

void write_profile_csv(std::ostream& os, const Profile& profile) {
  os << "r,value,dvalue\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < profile.size(); ++i)
    os << profile.r(i) << ',' << profile.values(i) << ',' << profile.derivative_values(i) << '\n';
}

void write_profile_csv(const std::string& path, const Profile& profile) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path);
  write_profile_csv(os, profile);
}

Profile read_profile_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("r,value,dvalue", 0) != 0)
    throw Error(ErrorCode::Io, "missing profile CSV header");
  std::vector<double> r, v, dv;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double a, b, c;
    char comma1, comma2;
    if (!(row >> a >> comma1 >> b >> comma2 >> c) || comma1 != ',' || comma2 != ',')
      throw Error(ErrorCode::Io, "malformed profile row: " + line);
    r.push_back(a);
    v.push_back(b);
    dv.push_back(c);
  }
  if (r.size() < 2) throw Error(ErrorCode::Io, "profile CSV has fewer than two rows");
  auto grid = std::make_shared<Grid>();
  grid->nodes = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
  grid->core_radius = r.back();
  grid->core_step = r[1] - r[0];
  Profile out;
  out.grid = grid;
  out.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  out.derivative_values = Eigen::Map<const Eigen::VectorXd>(dv.data(), static_cast<Eigen::Index>(dv.size()));
  return out;
}

bool is_positive_nonincreasing(const Profile& profile, double tolerance) {
  const auto& v = profile.values;
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0)) return false;
    if (i > 0 && v(i) > v(i - 1) + tolerance * scale) return false;
  }
  return true;
}

}  // namespace qsg
