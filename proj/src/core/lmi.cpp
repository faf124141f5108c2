#include "core/lmi.hpp"

#include <cstdlib>
#include <sstream>

#include "core/solver.hpp"

namespace dissent {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

int MatrixVar::param_count() const {
  switch (structure) {
    case VarStructure::Symmetric: return svec_dim(rows);
    case VarStructure::Full: return rows * cols;
    case VarStructure::DiagScalar: return 1;
    case VarStructure::Fixed: return 0;
  }
  return 0;
}

AffineMatExpr AffineMatExpr::zero(int rows, int cols) {
  return AffineMatExpr(MatrixXd::Zero(rows, cols));
}

void AffineMatExpr::ensure_constant() {
  if (constant_.size() == 0) constant_ = MatrixXd::Zero(rows_, cols_);
}

void AffineMatExpr::add_term(int var_id, MatrixXd left, MatrixXd right, bool transposed) {
  if (rows_ == 0 && cols_ == 0) {
    rows_ = static_cast<int>(left.rows());
    cols_ = static_cast<int>(right.cols());
  }
  if (left.rows() != rows_ || right.cols() != cols_)
    dim_error("AffineMatExpr::add_term", "term shape does not match expression");
  terms_.push_back(Term{var_id, std::move(left), std::move(right), transposed});
}

AffineMatExpr AffineMatExpr::transpose() const {
  AffineMatExpr out;
  out.rows_ = cols_;
  out.cols_ = rows_;
  if (constant_.size()) out.constant_ = constant_.transpose();
  for (const auto& t : terms_)
    out.terms_.push_back(Term{t.var_id, t.right.transpose(), t.left.transpose(),
                              !t.transposed});
  return out;
}

AffineMatExpr AffineMatExpr::operator-() const { return scaled(-1.0); }

AffineMatExpr& AffineMatExpr::operator+=(const AffineMatExpr& other) {
  if (rows_ == 0 && cols_ == 0) {
    rows_ = other.rows_;
    cols_ = other.cols_;
  }
  if (other.rows_ != rows_ || other.cols_ != cols_)
    dim_error("AffineMatExpr::operator+=", "shape mismatch");
  if (other.constant_.size()) {
    ensure_constant();
    constant_ += other.constant_;
  }
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

AffineMatExpr& AffineMatExpr::operator-=(const AffineMatExpr& other) {
  return *this += other.scaled(-1.0);
}

AffineMatExpr AffineMatExpr::scaled(double s) const {
  AffineMatExpr out = *this;
  if (out.constant_.size()) out.constant_ *= s;
  for (auto& t : out.terms_) t.left *= s;
  return out;
}

AffineMatExpr AffineMatExpr::pre_post(const MatrixXd& left, const MatrixXd& right) const {
  const MatrixXd l = left.size() ? left : MatrixXd::Identity(rows_, rows_);
  const MatrixXd r = right.size() ? right : MatrixXd::Identity(cols_, cols_);
  if (l.cols() != rows_ || r.rows() != cols_)
    dim_error("AffineMatExpr::pre_post", "factor shapes do not match");
  AffineMatExpr out;
  out.rows_ = static_cast<int>(l.rows());
  out.cols_ = static_cast<int>(r.cols());
  if (constant_.size()) out.constant_ = l * constant_ * r;
  for (const auto& t : terms_)
    out.terms_.push_back(Term{t.var_id, l * t.left, t.right * r, t.transposed});
  return out;
}

AffineMatExpr he(const AffineMatExpr& e) {
  if (e.rows() != e.cols()) dim_error("he", "expression must be square");
  return e + e.transpose();
}

AffineMatExpr block_diag_expr(const std::vector<AffineMatExpr>& blocks) {
  int rt = 0, ct = 0;
  for (const auto& b : blocks) {
    rt += b.rows();
    ct += b.cols();
  }
  AffineMatExpr out = AffineMatExpr::zero(rt, ct);
  int r = 0, c = 0;
  for (const auto& b : blocks) {
    MatrixXd lsel = MatrixXd::Zero(rt, b.rows());
    lsel.block(r, 0, b.rows(), b.rows()).setIdentity();
    MatrixXd rsel = MatrixXd::Zero(b.cols(), ct);
    rsel.block(0, c, b.cols(), b.cols()).setIdentity();
    out += b.pre_post(lsel, rsel);
    r += b.rows();
    c += b.cols();
  }
  return out;
}

// ---------------------------------------------------------------------------

SymBlockMatrix::SymBlockMatrix(std::vector<int> dims) : dims_(std::move(dims)) {
  offsets_.resize(dims_.size());
  for (size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i] <= 0) dim_error("SymBlockMatrix", "block dims must be positive");
    offsets_[i] = total_;
    total_ += dims_[i];
  }
  blocks_.resize(dims_.size());
  for (size_t i = 0; i < dims_.size(); ++i) {
    blocks_[i].resize(dims_.size());
    for (size_t j = 0; j < dims_.size(); ++j)
      blocks_[i][j] = MatrixXd::Zero(dims_[i], dims_[j]);
  }
}

void SymBlockMatrix::set(int i, int j, const MatrixXd& m) {
  if (i < 0 || j < 0 || i >= static_cast<int>(dims_.size()) ||
      j >= static_cast<int>(dims_.size()))
    dim_error("SymBlockMatrix::set", "block index out of range");
  if (m.rows() != dims_[i] || m.cols() != dims_[j]) {
    std::ostringstream os;
    os << "block (" << i << "," << j << ") must be " << dims_[i] << "x" << dims_[j]
       << ", got " << m.rows() << "x" << m.cols();
    dim_error("SymBlockMatrix::set", os.str());
  }
  if (i == j && !is_symmetric(m, 1e-12))
    dim_error("SymBlockMatrix::set", "diagonal block must be symmetric");
  blocks_[i][j] = m;
  blocks_[j][i] = m.transpose();
}

const MatrixXd& SymBlockMatrix::block(int i, int j) const { return blocks_[i][j]; }

MatrixXd SymBlockMatrix::assemble() const {
  MatrixXd out(total_, total_);
  for (size_t i = 0; i < dims_.size(); ++i)
    for (size_t j = 0; j < dims_.size(); ++j)
      out.block(offsets_[i], offsets_[j], dims_[i], dims_[j]) = blocks_[i][j];
  return out;
}

BlockExpr::BlockExpr(std::vector<int> dims) : dims_(std::move(dims)) {
  offsets_.resize(dims_.size());
  for (size_t i = 0; i < dims_.size(); ++i) {
    offsets_[i] = total_;
    total_ += dims_[i];
  }
  blocks_.resize(dims_.size());
  for (auto& row : blocks_) row.resize(dims_.size());
}

void BlockExpr::set(int i, int j, const AffineMatExpr& e) {
  if (i < 0 || j < 0 || i >= static_cast<int>(dims_.size()) ||
      j >= static_cast<int>(dims_.size()))
    dim_error("BlockExpr::set", "block index out of range");
  if (e.rows() != dims_[i] || e.cols() != dims_[j]) {
    std::ostringstream os;
    os << "block (" << i << "," << j << ") must be " << dims_[i] << "x" << dims_[j];
    dim_error("BlockExpr::set", os.str());
  }
  blocks_[i][j] = e;
}

AffineMatExpr BlockExpr::assemble() const {
  AffineMatExpr out = AffineMatExpr::zero(total_, total_);
  for (size_t i = 0; i < dims_.size(); ++i)
    for (size_t j = 0; j <= i; ++j) {
      if (!blocks_[i][j].has_value()) continue;
      // embed block via selector matrices
      MatrixXd sel_i = MatrixXd::Zero(total_, dims_[i]);
      sel_i.block(offsets_[i], 0, dims_[i], dims_[i]).setIdentity();
      MatrixXd sel_j = MatrixXd::Zero(dims_[j], total_);
      sel_j.block(0, offsets_[j], dims_[j], dims_[j]).setIdentity();
      const AffineMatExpr placed =
          blocks_[i][j]->pre_post(sel_i, sel_j);
      out += placed;
      if (i != j) out += placed.transpose();
    }
  return out;
}

// ---------------------------------------------------------------------------

const MatrixXd& SolveReport::value(int var_id) const {
  auto it = values.find(var_id);
  if (it == values.end())
    throw std::out_of_range("SolveReport::value: no value for variable " +
                            std::to_string(var_id));
  return it->second;
}

int ConeDims::total() const {
  int t = zero + nonneg;
  for (int q : soc) t += q;
  for (int n : psd) t += svec_dim(n);
  return t;
}

int ConicProgram::add_var(int rows, int cols, VarStructure st, std::string name) {
  if (st == VarStructure::Symmetric && rows != cols)
    dim_error("add_var", "symmetric variable must be square");
  if (st == VarStructure::DiagScalar && rows != cols)
    dim_error("add_var", "diagonal-scalar variable must be square");
  if (st == VarStructure::Fixed)
    dim_error("add_var", "use add_fixed for fixed variables");
  MatrixVar v;
  v.id = static_cast<int>(vars_.size());
  v.rows = rows;
  v.cols = cols;
  v.structure = st;
  v.name = std::move(name);
  vars_.push_back(v);
  return v.id;
}

int ConicProgram::add_fixed(const MatrixXd& value, std::string name) {
  MatrixVar v;
  v.id = static_cast<int>(vars_.size());
  v.rows = static_cast<int>(value.rows());
  v.cols = static_cast<int>(value.cols());
  v.structure = VarStructure::Fixed;
  v.fixed_value = value;
  v.name = std::move(name);
  vars_.push_back(v);
  return v.id;
}

AffineMatExpr ConicProgram::expr(int var_id) const {
  const MatrixVar& v = var(var_id);
  AffineMatExpr e = AffineMatExpr::zero(v.rows, v.cols);
  if (v.structure == VarStructure::Fixed) return AffineMatExpr(v.fixed_value);
  e.add_term(var_id, MatrixXd::Identity(v.rows, v.rows),
             MatrixXd::Identity(v.cols, v.cols));
  return e;
}

AffineMatExpr ConicProgram::expr(int var_id, const MatrixXd& left,
                                 const MatrixXd& right, bool transposed) const {
  const MatrixVar& v = var(var_id);
  const int r = transposed ? v.cols : v.rows;
  const int c = transposed ? v.rows : v.cols;
  const MatrixXd l = left.size() ? left : MatrixXd::Identity(r, r);
  const MatrixXd rr = right.size() ? right : MatrixXd::Identity(c, c);
  if (l.cols() != r || rr.rows() != c) dim_error("expr", "factor shape mismatch");
  if (v.structure == VarStructure::Fixed) {
    const MatrixXd val = transposed ? v.fixed_value.transpose() : v.fixed_value;
    return AffineMatExpr(l * val * rr);
  }
  AffineMatExpr e = AffineMatExpr::zero(static_cast<int>(l.rows()),
                                        static_cast<int>(rr.cols()));
  e.add_term(var_id, l, rr, transposed);
  return e;
}

AffineMatExpr ConicProgram::scaled_var(int var_id, const MatrixXd& coeff) const {
  const MatrixVar& v = var(var_id);
  if (v.rows != 1 || v.cols != 1)
    dim_error("scaled_var", "variable must be scalar (1x1)");
  if (v.structure == VarStructure::Fixed)
    return AffineMatExpr(v.fixed_value(0, 0) * coeff);
  AffineMatExpr e = AffineMatExpr::zero(static_cast<int>(coeff.rows()),
                                        static_cast<int>(coeff.cols()));
  for (int k = 0; k < coeff.cols(); ++k) {
    Eigen::RowVectorXd ek = Eigen::RowVectorXd::Zero(coeff.cols());
    ek[k] = 1.0;
    e.add_term(var_id, coeff.col(k), ek);
  }
  return e;
}

void ConicProgram::check_expr(const AffineMatExpr& e, const std::string& where) const {
  for (const auto& t : e.terms()) {
    if (t.var_id < 0 || t.var_id >= static_cast<int>(vars_.size()))
      throw std::invalid_argument(where + ": expression references undeclared variable");
  }
}

void ConicProgram::add_psd(const AffineMatExpr& e, bool strict) {
  if (e.rows() != e.cols()) dim_error("add_psd", "constraint must be square");
  check_expr(e, "add_psd");
  psd_.push_back(PsdC{e, strict});
}

void ConicProgram::add_nsd(const AffineMatExpr& e, bool strict) { add_psd(-e, strict); }

void ConicProgram::add_scalar(const AffineMatExpr& e, Rel rel) {
  if (e.rows() != 1 || e.cols() != 1) dim_error("add_scalar", "constraint must be 1x1");
  check_expr(e, "add_scalar");
  linear_.push_back(LinC{e, rel});
}

void ConicProgram::add_linear_objective(const AffineMatExpr& e) {
  if (e.rows() != 1 || e.cols() != 1)
    dim_error("add_linear_objective", "objective must be 1x1");
  check_expr(e, "add_linear_objective");
  if (lin_obj_.rows() == 0)
    lin_obj_ = e;
  else
    lin_obj_ += e;
}

void ConicProgram::add_quad_objective(const AffineMatExpr& e, double w) {
  check_expr(e, "add_quad_objective");
  if (w < 0.0)
    throw std::invalid_argument(
        "add_quad_objective: negative weight would make the objective nonconvex");
  if (w == 0.0) return;
  quad_obj_.push_back(QuadObj{e, w});
}

void ConicProgram::vectorize(const AffineMatExpr& e, MatrixXd& lin, VectorXd& cst,
                             const std::vector<int>& offsets, int num_params) const {
  const int r = e.rows(), c = e.cols();
  lin = MatrixXd::Zero(r * c, num_params);
  cst = VectorXd::Zero(r * c);
  if (e.constant().size()) {
    for (int j = 0; j < c; ++j) cst.segment(j * r, r) = e.constant().col(j);
  }
  for (const auto& t : e.terms()) {
    const MatrixVar& v = vars_[t.var_id];
    const MatrixXd& Lf = t.left;
    const MatrixXd& Rf = t.right;
    if (v.structure == VarStructure::Fixed) {
      const MatrixXd m = Lf * (t.transposed ? v.fixed_value.transpose() : v.fixed_value) * Rf;
      for (int j = 0; j < c; ++j) cst.segment(j * r, r) += m.col(j);
      continue;
    }
    const int off = offsets[t.var_id];
    auto add_outer = [&](int col_param, const VectorXd& lcol, const Eigen::RowVectorXd& rrow,
                         double scale) {
      // contribution scale * lcol * rrow into lin column col_param
      for (int j = 0; j < c; ++j)
        lin.col(col_param).segment(j * r, r) += (scale * rrow[j]) * lcol;
    };
    switch (v.structure) {
      case VarStructure::Full: {
        // params are vec(V) column-major; V' swaps index roles
        for (int q = 0; q < v.cols; ++q)
          for (int pidx = 0; pidx < v.rows; ++pidx) {
            const int k = off + q * v.rows + pidx;
            if (!t.transposed)
              add_outer(k, Lf.col(pidx), Rf.row(q), 1.0);
            else
              add_outer(k, Lf.col(q), Rf.row(pidx), 1.0);
          }
        break;
      }
      case VarStructure::Symmetric: {
        int k = off;
        for (int q = 0; q < v.rows; ++q) {
          add_outer(k, Lf.col(q), Rf.row(q), 1.0);
          ++k;
          for (int pidx = q + 1; pidx < v.rows; ++pidx) {
            add_outer(k, Lf.col(pidx), Rf.row(q), 1.0 / kSqrt2);
            add_outer(k, Lf.col(q), Rf.row(pidx), 1.0 / kSqrt2);
            ++k;
          }
        }
        break;
      }
      case VarStructure::DiagScalar: {
        const MatrixXd m = Lf * Rf;
        for (int j = 0; j < c; ++j) lin.col(off).segment(j * r, r) += m.col(j);
        break;
      }
      case VarStructure::Fixed: break;
    }
  }
}

LoweredConic ConicProgram::lower_to_conic(double strictness_margin) const {
  if (strictness_margin < 0.0)
    throw std::invalid_argument("lower_to_conic: margin must be nonnegative");
  LoweredConic out;

  // variable layout
  std::vector<int> offsets(vars_.size(), 0);
  int num_params = 0;
  for (size_t i = 0; i < vars_.size(); ++i) {
    offsets[i] = num_params;
    num_params += vars_[i].param_count();
    if (vars_[i].structure != VarStructure::Fixed)
      out.slots.push_back(LoweredConic::Slot{vars_[i].id, vars_[i].structure,
                                             vars_[i].rows, vars_[i].cols, offsets[i],
                                             vars_[i].param_count()});
  }
  const int num_epi = static_cast<int>(quad_obj_.size());
  const int p = num_params + num_epi;

  // objective
  out.c = VectorXd::Zero(p);
  out.obj_constant = 0.0;
  if (lin_obj_.rows() == 1) {
    MatrixXd lin;
    VectorXd cst;
    vectorize(lin_obj_, lin, cst, offsets, num_params);
    out.c.head(num_params) = lin.row(0).transpose();
    out.obj_constant = cst[0];
  }
  for (int j = 0; j < num_epi; ++j) out.c[num_params + j] = quad_obj_[j].weight;

  struct Row {
    Eigen::RowVectorXd g;
    double h;
  };
  std::vector<Row> eq_rows, nn_rows;

  for (const auto& lc : linear_) {
    MatrixXd lin;
    VectorXd cst;
    vectorize(lc.expr, lin, cst, offsets, num_params);
    Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(p);
    switch (lc.rel) {
      case Rel::Eq:
        g.head(num_params) = lin.row(0);
        eq_rows.push_back(Row{g, -cst[0]});  // lin x + cst = 0 -> lin x = -cst
        break;
      case Rel::Ge:
        g.head(num_params) = -lin.row(0);
        nn_rows.push_back(Row{g, cst[0]});  // s = cst + lin x >= 0
        break;
      case Rel::Le:
        g.head(num_params) = lin.row(0);
        nn_rows.push_back(Row{g, -cst[0]});  // s = -cst - lin x >= 0
        break;
    }
  }

  // second-order cones for the quadratic epigraphs
  struct SocBlock {
    MatrixXd g;
    VectorXd h;
  };
  std::vector<SocBlock> socs;
  for (int j = 0; j < num_epi; ++j) {
    MatrixXd lin;
    VectorXd cst;
    vectorize(quad_obj_[j].expr, lin, cst, offsets, num_params);
    const int d = static_cast<int>(cst.size());
    SocBlock blk;
    blk.g = MatrixXd::Zero(d + 2, p);
    blk.h = VectorXd::Zero(d + 2);
    const int tcol = num_params + j;
    // s0 = 1 + t
    blk.g(0, tcol) = -1.0;
    blk.h[0] = 1.0;
    // middle = 2 (lin x + cst)
    blk.g.block(1, 0, d, num_params) = -2.0 * lin;
    blk.h.segment(1, d) = 2.0 * cst;
    // last = 1 - t
    blk.g(d + 1, tcol) = 1.0;
    blk.h[d + 1] = 1.0;
    socs.push_back(std::move(blk));
  }

  // PSD blocks
  struct PsdBlock {
    MatrixXd g;
    VectorXd h;
    int order;
  };
  std::vector<PsdBlock> psds;
  for (const auto& pc : psd_) {
    MatrixXd lin;
    VectorXd cst;
    vectorize(pc.expr, lin, cst, offsets, num_params);
    const int n = pc.expr.rows();
    PsdBlock blk;
    blk.order = n;
    blk.g = MatrixXd::Zero(svec_dim(n), p);
    for (int k = 0; k < num_params; ++k) {
      MatrixXd f(n, n);
      for (int j = 0; j < n; ++j) f.col(j) = lin.col(k).segment(j * n, n);
      if ((f - f.transpose()).cwiseAbs().maxCoeff() >
          1e-9 * std::max(1.0, f.cwiseAbs().maxCoeff()))
        throw std::invalid_argument(
            "lower_to_conic: PSD constraint expression is not symmetric");
      blk.g.col(k) = -svec(symmetrize(f));
    }
    MatrixXd f0(n, n);
    for (int j = 0; j < n; ++j) f0.col(j) = cst.segment(j * n, n);
    f0 = symmetrize(f0);
    if (pc.strict) f0 -= strictness_margin * MatrixXd::Identity(n, n);
    blk.h = svec(f0);
    psds.push_back(std::move(blk));
  }

  // assemble G, h in cone order [eq; nonneg; soc...; psd...]
  out.dims.zero = static_cast<int>(eq_rows.size());
  out.dims.nonneg = static_cast<int>(nn_rows.size());
  for (const auto& s : socs) out.dims.soc.push_back(static_cast<int>(s.h.size()));
  for (const auto& b : psds) out.dims.psd.push_back(b.order);

  const int m = out.dims.total();
  out.G = MatrixXd::Zero(m, p);
  out.h = VectorXd::Zero(m);
  int row = 0;
  for (const auto& r : eq_rows) {
    out.G.row(row) = r.g;
    out.h[row] = r.h;
    ++row;
  }
  for (const auto& r : nn_rows) {
    out.G.row(row) = r.g;
    out.h[row] = r.h;
    ++row;
  }
  for (const auto& s : socs) {
    out.G.middleRows(row, s.h.size()) = s.g;
    out.h.segment(row, s.h.size()) = s.h;
    row += static_cast<int>(s.h.size());
  }
  for (const auto& b : psds) {
    out.G.middleRows(row, b.h.size()) = b.g;
    out.h.segment(row, b.h.size()) = b.h;
    row += static_cast<int>(b.h.size());
  }
  return out;
}

SolveReport ConicProgram::solve(const SolverOptions& opts) const {
  return solve(bundled_solver(), opts);
}

SolveReport ConicProgram::solve(const ConeSolver& solver, const SolverOptions& opts) const {
  LoweredConic low = lower_to_conic(opts.strictness_margin);
  const auto caps = solver.caps();
  if (!low.dims.psd.empty() && !caps.psd)
    throw std::invalid_argument("solve: solver does not support PSD cones");
  if (!low.dims.soc.empty() && !caps.soc)
    throw std::invalid_argument("solve: solver does not support second-order cones");

  SolverOptions o = opts;
  o.tol = effective_solver_tol(opts.tol);
  SolveReport rep = solver.solve_lowered(low, o);
  if (rep.status != SolveStatus::Optimal) return rep;

  for (const auto& slot : low.slots) {
    const VectorXd seg = rep.raw_x.segment(slot.offset, slot.count);
    MatrixXd val;
    switch (slot.structure) {
      case VarStructure::Symmetric: val = unsvec(seg, slot.rows); break;
      case VarStructure::Full: {
        val.resize(slot.rows, slot.cols);
        for (int j = 0; j < slot.cols; ++j) val.col(j) = seg.segment(j * slot.rows, slot.rows);
        break;
      }
      case VarStructure::DiagScalar:
        val = seg[0] * MatrixXd::Identity(slot.rows, slot.cols);
        break;
      case VarStructure::Fixed: break;
    }
    rep.values[slot.var_id] = val;
  }
  for (const auto& v : vars_)
    if (v.structure == VarStructure::Fixed) rep.values[v.id] = v.fixed_value;

  // recompute the objective from the recovered values: exact quadratics
  // instead of (slightly slack) epigraph variables
  double obj = low.c.dot(rep.raw_x) + low.obj_constant;
  int num_params = 0;
  std::vector<int> offs(vars_.size(), 0);
  for (size_t i = 0; i < vars_.size(); ++i) {
    offs[i] = num_params;
    num_params += vars_[i].param_count();
  }
  for (size_t j = 0; j < quad_obj_.size(); ++j) {
    obj -= quad_obj_[j].weight * rep.raw_x[num_params + static_cast<int>(j)];
    MatrixXd lin;
    VectorXd cst;
    vectorize(quad_obj_[j].expr, lin, cst, offs, num_params);
    const VectorXd val = lin * rep.raw_x.head(num_params) + cst;
    obj += quad_obj_[j].weight * val.squaredNorm();
  }
  rep.objective = obj;
  return rep;
}

MatrixXd ConicProgram::eval(const AffineMatExpr& e,
                            const std::map<int, MatrixXd>& vals) const {
  MatrixXd out =
      e.constant().size() ? e.constant() : MatrixXd::Zero(e.rows(), e.cols());
  for (const auto& t : e.terms()) {
    const MatrixVar& v = vars_.at(t.var_id);
    const MatrixXd& val =
        (v.structure == VarStructure::Fixed) ? v.fixed_value : vals.at(t.var_id);
    out += t.left * (t.transposed ? MatrixXd(val.transpose()) : val) * t.right;
  }
  return out;
}

const ConeSolver& bundled_solver() {
  static HsdeSolver s;
  return s;
}

double effective_solver_tol(double fallback) {
  const char* env = std::getenv("DISSENT_SOLVER_TOL");
  if (env && *env) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0 && v < 1.0) return v;
  }
  return fallback;
}

}  // namespace dissent
