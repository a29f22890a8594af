#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace dgopt {

/// A local objective f_i: R^p -> R with Lipschitz gradient (constant l) and
/// strong convexity (constant s <= l). Implementations are immutable.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual double value(const Eigen::VectorXd& z) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& z) const = 0;
  virtual double lipschitz() const = 0;
  virtual double strong_convexity() const = 0;
  virtual int dimension() const = 0;
};

using ObjectivePtr = std::shared_ptr<const Objective>;
using ObjectiveSet = std::vector<ObjectivePtr>;

/// f(z) = 1/2 (z - b)^T diag(q) (z - b).
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Eigen::VectorXd center, Eigen::VectorXd curvature);

  double value(const Eigen::VectorXd& z) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const override;
  double lipschitz() const override { return curvature_.maxCoeff(); }
  double strong_convexity() const override { return curvature_.minCoeff(); }
  int dimension() const override { return static_cast<int>(center_.size()); }

  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::VectorXd& curvature() const { return curvature_; }

 private:
  Eigen::VectorXd center_;
  Eigen::VectorXd curvature_;
};

ObjectivePtr quadratic_objective(Eigen::VectorXd center, Eigen::VectorXd curvature);

/// Per-agent training data for regularised logistic regression.
struct LogisticData {
  std::vector<Eigen::MatrixXd> features;  ///< agent i: m_i x p, one example per row
  std::vector<Eigen::VectorXd> labels;    ///< agent i: m_i entries in {-1, +1}
  double beta = 1.0;                      ///< global ridge weight
  Eigen::VectorXd planted;                ///< generating hyperplane, empty if unknown

  int agents() const { return static_cast<int>(features.size()); }
  int dimension() const { return features.empty() ? 0 : static_cast<int>(features[0].cols()); }
  void validate() const;
};

/// f_i(z) = beta/(2n) ||z||^2 + sum_j log(1 + exp(-b_ij c_ij^T z)).
/// s = beta/n, l = beta/n + 1/4 sum_j ||c_ij||^2.
class LogisticObjective final : public Objective {
 public:
  LogisticObjective(Eigen::MatrixXd features, Eigen::VectorXd labels, double beta, int agents);

  double value(const Eigen::VectorXd& z) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const override;
  double lipschitz() const override { return lipschitz_; }
  double strong_convexity() const override { return ridge_; }
  int dimension() const override { return static_cast<int>(features_.cols()); }

 private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd labels_;
  double ridge_;
  double lipschitz_;
};

/// One objective per agent in `data`.
ObjectiveSet logistic_objectives(const LogisticData& data);

/// Normal features with standard deviation `feature_std`, labels
/// sign(c^T w) for a standard-normal planted w, each label flipped with
/// probability `flip_prob`. Deterministic in seed; the labels do not depend
/// on `feature_std`.
LogisticData generate_dataset(int n, int m, int p, std::uint64_t seed, double beta = 1.0,
                              double flip_prob = 0.1, double feature_std = 1.0);

/// Feature scale 2 / sqrt(m p), which makes E[1/4 sum_j ||c_ij||^2] = 1, so
/// each agent's Lipschitz bound is close to 1 + beta/n.
double unit_lipschitz_feature_std(int m, int p);

/// CSV with header `agent,label,f1,...,fp`.
void write_dataset_csv(std::ostream& out, const LogisticData& data);
LogisticData read_dataset_csv(std::istream& in, double beta);
LogisticData load_dataset(const std::filesystem::path& path, double beta);

/// Network constants consumed by the analysis: l = max_i l_i, s = min_i s_i.
double network_lipschitz(const ObjectiveSet& objs);
double network_strong_convexity(const ObjectiveSet& objs);

double total_value(const ObjectiveSet& objs, const Eigen::VectorXd& z);
Eigen::VectorXd total_gradient(const ObjectiveSet& objs, const Eigen::VectorXd& z);

/// Minimiser of F = sum_i f_i.
struct Optimum {
  Eigen::VectorXd z_star;
  double f_star = 0.0;
  std::string method;
  double residual_norm = 0.0;  ///< ||grad F(z_star)||_2
  long iterations = 0;
  bool converged = false;
};

struct SolveOptions {
  long max_iterations = 5'000'000;
  double tolerance = 1e-12;  ///< stop when ||grad F|| <= tolerance * max(1, ||z||)
};

/// Gradient descent on F with step 1/(n l). Hitting the iteration cap returns
/// the best iterate seen with converged = false.
Optimum centralized_solve(const ObjectiveSet& objs, const SolveOptions& options = {});

}  // namespace dgopt
