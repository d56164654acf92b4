#ifndef DOUBLETHINK_SUBSET_SCANNER_HPP
#define DOUBLETHINK_SUBSET_SCANNER_HPP

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doublethink/errors.hpp"
#include "doublethink/model_id.hpp"

namespace doublethink::linmodel {

/// Enumerates every subset of candidate columns with a depth-first walk in
/// which each child model appends one higher-indexed column to its parent.
/// The inverse Cholesky factor of the candidate Gram matrix (after the
/// nuisance columns have been projected out) is extended by one row per step,
/// so each model costs O(k^2) instead of a fresh O(n k^2) factorization.
///
/// The Gram matrix is fixed at construction; the response enters per walk
/// through the cross products X_r' y_r, so one scanner serves many simulated
/// responses over the same design.
class SubsetScanner {
 public:
  /// `gram` is X_r' X_r; `rank_tolerance` is absolute on the Cholesky pivot
  /// (the R diagonal of the equivalent QR).
  SubsetScanner(Eigen::MatrixXd gram, double rank_tolerance);

  /// Builds the scanner from the residualized design itself, using the
  /// relative tolerance times its largest column norm.
  static SubsetScanner from_design(const Eigen::Ref<const Eigen::MatrixXd>& residualized, double relative_tolerance);

  int nu() const { return static_cast<int>(gram_.rows()); }
  const Eigen::MatrixXd& gram() const { return gram_; }

  class ModelView {
   public:
    ModelId model;
    int size = 0;
    double explained = 0.0;  // ||z||^2: RSS reduction relative to the nuisance-only fit

    /// Least-squares coefficients of the included columns (index order) and
    /// the diagonal of the inverse Gram block, i.e. coefficient variances up to
    /// the error variance.
    void coefficients(double* beta, double* inverse_gram_diagonal) const {
      for (int m = 0; m < size; ++m) {
        double b = 0.0;
        double v = 0.0;
        for (int i = m; i < size; ++i) {
          const double li = linv_(i, m);
          b += li * z_(i);
          v += li * li;
        }
        beta[m] = b;
        inverse_gram_diagonal[m] = v;
      }
    }
    const int* path() const { return path_; }

   private:
    friend class SubsetScanner;
    ModelView(const Eigen::MatrixXd& linv, const Eigen::VectorXd& z, const int* path)
        : linv_(linv), z_(z), path_(path) {}
    const Eigen::MatrixXd& linv_;
    const Eigen::VectorXd& z_;
    const int* path_;
  };

  /// Calls `visit(const ModelView&)` once per model, grand null first, in
  /// depth-first order (deterministic). Throws RankDeficient if any selection
  /// of columns is collinear.
  template <class Visitor>
  void for_each_model(const Eigen::Ref<const Eigen::VectorXd>& cross, Visitor&& visit) const {
    Workspace ws(nu());
    ModelView view(ws.linv, ws.z, ws.path.data());
    view.model = ModelId{};
    view.size = 0;
    view.explained = 0.0;
    visit(static_cast<const ModelView&>(view));
    descend(cross, ws, view, 0, 0, visit);
  }

 private:
  struct Workspace {
    explicit Workspace(int nu) : linv(Eigen::MatrixXd::Zero(nu, nu)), z(Eigen::VectorXd::Zero(nu)), l(nu), path(nu, -1) {}
    Eigen::MatrixXd linv;
    Eigen::VectorXd z;
    Eigen::VectorXd l;
    std::vector<int> path;
  };

  template <class Visitor>
  void descend(const Eigen::Ref<const Eigen::VectorXd>& cross, Workspace& ws, ModelView& view, int depth, int first,
               Visitor& visit) const {
    const ModelId parent = view.model;
    const double parent_explained = view.explained;
    for (int j = first; j < nu(); ++j) {
      // l = L^{-1} g with g_i = G(path_i, j)
      double lnorm2 = 0.0;
      double lz = 0.0;
      for (int i = 0; i < depth; ++i) {
        double acc = 0.0;
        for (int m = 0; m <= i; ++m) acc += ws.linv(i, m) * gram_(ws.path[m], j);
        ws.l(i) = acc;
        lnorm2 += acc * acc;
        lz += acc * ws.z(i);
      }
      const double pivot2 = gram_(j, j) - lnorm2;
      if (!(pivot2 > tolerance_ * tolerance_)) {
        throw Error(ErrorCode::RankDeficient,
                    "model " + std::to_string(parent.with(j).bits()) + " has collinear candidate columns");
      }
      const double pivot = std::sqrt(pivot2);
      const double inv_pivot = 1.0 / pivot;
      for (int m = 0; m < depth; ++m) {
        double acc = 0.0;
        for (int i = m; i < depth; ++i) acc += ws.l(i) * ws.linv(i, m);
        ws.linv(depth, m) = -acc * inv_pivot;
      }
      ws.linv(depth, depth) = inv_pivot;
      const double zd = (cross(j) - lz) * inv_pivot;
      ws.z(depth) = zd;
      ws.path[depth] = j;

      view.model = parent.with(j);
      view.size = depth + 1;
      view.explained = parent_explained + zd * zd;
      visit(static_cast<const ModelView&>(view));
      descend(cross, ws, view, depth + 1, j + 1, visit);
    }
    view.model = parent;
    view.size = depth;
    view.explained = parent_explained;
  }

  Eigen::MatrixXd gram_;
  double tolerance_;
};

/// Projects the nuisance columns out of X and y (Frisch-Waugh). Returns the
/// residualized design and response.
struct Residualized {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};
Residualized residualize(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                         const Eigen::Ref<const Eigen::MatrixXd>& nuisance);

}  // namespace doublethink::linmodel

#endif  // DOUBLETHINK_SUBSET_SCANNER_HPP
