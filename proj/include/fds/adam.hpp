/*
 * Copyright 2026 The fds Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FDS_ADAM_HPP_
#define FDS_ADAM_HPP_

#include <cmath>

#include <Eigen/Dense>

namespace fds {

// Adaptive-moment optimizer with bias correction. Minimizes: callers doing
// ascent pass the negated gradient.
class Adam {
 public:
  struct Options {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  explicit Adam(Eigen::Index size) : Adam(size, Options{}) {}
  Adam(Eigen::Index size, Options options)
      : options_(options),
        m_(Eigen::VectorXd::Zero(size)),
        v_(Eigen::VectorXd::Zero(size)) {}

  void step(Eigen::Ref<Eigen::VectorXd> params,
            const Eigen::Ref<const Eigen::VectorXd>& grad, double lr) {
    ++t_;
    m_ = options_.beta1 * m_ + (1.0 - options_.beta1) * grad;
    v_ = options_.beta2 * v_ +
         (1.0 - options_.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
    params.array() -= lr * (m_.array() / c1) /
                      ((v_.array() / c2).sqrt() + options_.epsilon);
  }

  long steps() const { return t_; }

 private:
  Options options_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long t_ = 0;
};

// Step decay: lr * decay^floor(epoch / step_epochs).
struct StepSchedule {
  double lr = 0.01;
  double decay = 1.0;
  int step_epochs = 1;

  double at(int epoch) const {
    return lr * std::pow(decay, static_cast<double>(epoch / step_epochs));
  }
};

}  // namespace fds

#endif  // FDS_ADAM_HPP_
