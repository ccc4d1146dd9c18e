#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "trasa/ad/tensor.hpp"

namespace trasa::ad {

template <typename T>
class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while
/// the tape that produced it is alive and has not been reset.
template <typename T>
class Var {
 public:
  Var() = default;

  Tape<T>* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  friend class Tape<T>;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// The computation record: an append-only list of operations in creation
/// order (which is a topological order), each with its inputs and a
/// backward rule. `backward` replays the rules in reverse, summing the
/// gradients of values consumed more than once.
///
/// One tape per forward pass. Not thread-safe; distinct tapes are
/// independent.
template <typename T>
class Tape {
 public:
  /// Propagates the gradient of node `self` into its inputs.
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Owned value that never receives a gradient.
  Var<T> constant(Tensor<T> value);
  /// Owned leaf that requires a gradient (readable through grad()).
  Var<T> variable(Tensor<T> value);
  /// Bound leaf referring to an external tensor without copying it. When
  /// `param.requires_grad()`, backward accumulates into `param`'s gradient
  /// buffer. `param` must outlive the tape.
  Var<T> parameter(Tensor<T>& param);
  /// Read-only external tensor (no gradient). Must outlive the tape.
  Var<T> view(const Tensor<T>& value);

  /// Append an operation. `fn` is dropped when no input requires a
  /// gradient, in which case the result is a constant.
  Var<T> record(Tensor<T> value, std::initializer_list<Var<T>> inputs, BackwardFn fn);
  Var<T> record(Tensor<T> value, std::span<const Var<T>> inputs, BackwardFn fn);

  const Tensor<T>& value(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  /// Gradient of a node; empty when backward never reached it.
  std::span<const T> grad(Var<T> v) const;
  /// Mutable gradient buffer of a node, zero-allocated on first use.
  std::vector<T>& grad_buffer(std::size_t id);
  const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_.at(id).inputs; }

  /// Seeds d(loss)/d(loss) = 1 and runs every backward rule once.
  /// Throws ContractError for non-scalar losses and StateError when the
  /// tape has already been consumed.
  void backward(Var<T> loss);

  /// Drop every recorded node. Previously issued Vars become dangling.
  void reset();

  bool consumed() const { return consumed_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> owned;
    const Tensor<T>* external = nullptr;
    Tensor<T>* grad_target = nullptr;
    bool requires_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  Var<T> push(Node node);

  std::deque<Node> nodes_;
  bool consumed_ = false;
};

template <typename T>
const Tensor<T>& Var<T>::value() const {
  return tape_->value(id_);
}

template <typename T>
bool Var<T>::requires_grad() const {
  return tape_->requires_grad(id_);
}

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace trasa::ad
