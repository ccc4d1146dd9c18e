#include "trasa/ad/tape.hpp"

namespace trasa::ad {

template <typename T>
Var<T> Tape<T>::push(Node node) {
  if (consumed_) throw StateError("cannot record on a tape consumed by backward; reset it first");
  nodes_.push_back(std::move(node));
  return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
Var<T> Tape<T>::constant(Tensor<T> value) {
  Node node;
  value.set_requires_grad(false);
  node.owned = std::move(value);
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::variable(Tensor<T> value) {
  Node node;
  value.set_requires_grad(true);
  node.owned = std::move(value);
  node.requires_grad = true;
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::parameter(Tensor<T>& param) {
  Node node;
  node.external = &param;
  if (param.requires_grad()) {
    node.grad_target = &param;
    node.requires_grad = true;
  }
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::view(const Tensor<T>& value) {
  Node node;
  node.external = &value;
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::record(Tensor<T> value, std::initializer_list<Var<T>> inputs, BackwardFn fn) {
  return record(std::move(value), std::span<const Var<T>>(inputs.begin(), inputs.size()),
                std::move(fn));
}

template <typename T>
Var<T> Tape<T>::record(Tensor<T> value, std::span<const Var<T>> inputs, BackwardFn fn) {
  Node node;
  node.inputs.reserve(inputs.size());
  for (const auto& in : inputs) {
    if (in.tape() != this) throw InvariantError("operation mixes values from different tapes");
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  value.set_requires_grad(node.requires_grad);
  node.owned = std::move(value);
  if (node.requires_grad) node.backward = std::move(fn);
  return push(std::move(node));
}

template <typename T>
const Tensor<T>& Tape<T>::value(std::size_t id) const {
  const Node& node = nodes_.at(id);
  return node.external ? *node.external : node.owned;
}

template <typename T>
std::span<const T> Tape<T>::grad(Var<T> v) const {
  const Node& node = nodes_.at(v.id());
  if (node.grad_target) return node.grad_target->grad();
  return node.owned.grad();
}

template <typename T>
std::vector<T>& Tape<T>::grad_buffer(std::size_t id) {
  Node& node = nodes_.at(id);
  if (node.grad_target) return node.grad_target->grad_buffer();
  if (node.external) throw InvariantError("gradient requested for a read-only view");
  return node.owned.grad_buffer();
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
  if (loss.tape() != this) throw ContractError("loss was not recorded on this tape");
  if (consumed_) throw StateError("backward already ran on this tape; reset before reuse");
  if (value(loss.id()).size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " +
                        to_string(value(loss.id()).shape()));
  }
  consumed_ = true;
  if (!nodes_[loss.id()].requires_grad) return;

  // Leaves bound to parameters accumulate across tapes, so "reached" is
  // tracked here rather than inferred from a non-empty buffer.
  std::vector<char> reached(loss.id() + 1, 0);
  grad_buffer(loss.id())[0] += T(1);
  reached[loss.id()] = 1;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    if (!reached[id]) continue;
    Node& node = nodes_[id];
    if (!node.backward) continue;
    for (auto in : node.inputs) {
      if (nodes_[in].requires_grad) {
        reached[in] = 1;
        grad_buffer(in);
      }
    }
    node.backward(*this, id);
  }
}

template <typename T>
void Tape<T>::reset() {
  nodes_.clear();
  consumed_ = false;
}

template class Tape<float>;
template class Tape<double>;

}  // namespace trasa::ad
