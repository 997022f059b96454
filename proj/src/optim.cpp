#include "gacn/optim.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "gacn/error.hpp"

namespace gacn {

bool Adam::step(const std::string& name, diff::Matrix& param, const diff::Matrix& grad) {
  require(param.rows() == grad.rows() && param.cols() == grad.cols(), "adam: gradient shape mismatch");
  if (!grad.allFinite()) throw NumericError("adam:" + name);
  if ((grad.array() == 0.0).all()) return false;
  Slot& s = slots_[name];
  if (s.t == 0) {
    s.m = diff::Matrix::Zero(param.rows(), param.cols());
    s.v = diff::Matrix::Zero(param.rows(), param.cols());
  }
  require(s.m.rows() == param.rows() && s.m.cols() == param.cols(), "adam: moment shape mismatch for " + name);
  ++s.t;
  s.m = opt_.beta1 * s.m + (1.0 - opt_.beta1) * grad;
  s.v = opt_.beta2 * s.v + (1.0 - opt_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(s.t));
  param.array() -= opt_.lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + opt_.eps);
  return true;
}

std::uint64_t Adam::steps(const std::string& name) const {
  auto it = slots_.find(name);
  return it == slots_.end() ? 0 : it->second.t;
}

void Adam::save(std::ostream& os) const {
  os.precision(17);
  os << "gacn-adam 1\n"
     << "lr " << opt_.lr << " beta1 " << opt_.beta1 << " beta2 " << opt_.beta2 << " eps " << opt_.eps << '\n'
     << "slots " << slots_.size() << '\n';
  for (const auto& [name, s] : slots_) {
    os << name << ' ' << s.t << ' ' << s.m.rows() << ' ' << s.m.cols() << '\n';
    for (const auto* m : {&s.m, &s.v}) {
      for (diff::Index i = 0; i < m->size(); ++i) os << (i ? " " : "") << m->data()[i];
      os << '\n';
    }
  }
}

void Adam::load(std::istream& is, const std::string& source) {
  std::string tag, k1, k2, k3, k4, k5;
  int version = 0;
  std::size_t n = 0;
  AdamOptions o;
  if (!(is >> tag >> version >> k1 >> o.lr >> k2 >> o.beta1 >> k3 >> o.beta2 >> k4 >> o.eps >> k5 >> n) ||
      tag != "gacn-adam" || version != 1 || k5 != "slots") {
    throw ParseError(source, 0, "bad optimizer header");
  }
  std::map<std::string, Slot> slots;
  for (std::size_t i = 0; i < n; ++i) {
    std::string name;
    Slot s;
    diff::Index r = 0, c = 0;
    if (!(is >> name >> s.t >> r >> c)) throw ParseError(source, 0, "truncated optimizer slot");
    s.m.resize(r, c);
    s.v.resize(r, c);
    for (auto* m : {&s.m, &s.v})
      for (diff::Index j = 0; j < m->size(); ++j)
        if (!(is >> m->data()[j])) throw ParseError(source, 0, "truncated optimizer moments");
    slots.emplace(name, std::move(s));
  }
  opt_ = o;
  slots_ = std::move(slots);
}

}  // namespace gacn
