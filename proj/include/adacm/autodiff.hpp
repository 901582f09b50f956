#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "adacm/errors.hpp"
#include "adacm/tensor.hpp"

namespace adacm {

/// Handle to a node on a Tape.
struct Var {
    std::size_t id = static_cast<std::size_t>(-1);
    bool valid() const { return id != static_cast<std::size_t>(-1); }
};

/// Reverse-mode tape over whole tensors. Every operation records its value
/// and a closure that scatters the upstream gradient into its parents.
/// Nodes are appended in topological order, so backward() is a single reverse
/// sweep. Single-threaded by contract; one backward pass per tape lifetime.
/// Nodes live in a deque so references returned by value()/grad() stay valid
/// while further operations are recorded.
class Tape {
public:
    Var leaf(Tensor value) {
        return push(std::move(value), nullptr);
    }

    const Tensor& value(Var v) const { return node(v).value; }
    const Tensor& grad(Var v) const { return node(v).grad; }
    std::size_t size() const { return nodes_.size(); }

    void clear() { nodes_.clear(); }

    void backward(Var loss) {
        if (loss.id >= nodes_.size()) throw GraphError("loss variable is not on this tape");
        if (nodes_[loss.id].value.size() != 1)
            throw GraphError("backward requires a scalar loss, got shape " +
                             nodes_[loss.id].value.shape_str());
        nodes_[loss.id].grad[0] += 1.0;
        for (std::size_t i = loss.id + 1; i-- > 0;) {
            if (nodes_[i].back) nodes_[i].back(*this, i);
        }
    }

    // ---- ops ----

    Var matmul(Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        require(A.rank() == 2 && B.rank() == 2 && A.cols() == B.rows(),
                "matmul shapes " + A.shape_str() + " x " + B.shape_str());
        std::size_t n = A.rows(), k = A.cols(), m = B.cols();
        Tensor out({n, m});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t p = 0; p < k; ++p) {
                double av = A(i, p);
                if (av == 0.0) continue;
                for (std::size_t j = 0; j < m; ++j) out(i, j) += av * B(p, j);
            }
        return push(std::move(out), [a, b](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& A = t.value(a);
            const Tensor& B = t.value(b);
            Tensor& ga = t.nodes_[a.id].grad;
            Tensor& gb = t.nodes_[b.id].grad;
            std::size_t n = A.rows(), k = A.cols(), m = B.cols();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < m; ++j) acc += g(i, j) * B(p, j);
                    ga(i, p) += acc;
                }
            for (std::size_t p = 0; p < k; ++p)
                for (std::size_t i = 0; i < n; ++i) {
                    double av = A(i, p);
                    if (av == 0.0) continue;
                    for (std::size_t j = 0; j < m; ++j) gb(p, j) += av * g(i, j);
                }
        });
    }

    /// out = a * b^T; a is [N,K], b is [M,K], result [N,M].
    Var matmul_nt(Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        require(A.rank() == 2 && B.rank() == 2 && A.cols() == B.cols(),
                "matmul_nt shapes " + A.shape_str() + " x " + B.shape_str());
        std::size_t n = A.rows(), k = A.cols(), m = B.rows();
        Tensor out({n, m});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double acc = 0.0;
                for (std::size_t p = 0; p < k; ++p) acc += A(i, p) * B(j, p);
                out(i, j) = acc;
            }
        return push(std::move(out), [a, b](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& A = t.value(a);
            const Tensor& B = t.value(b);
            Tensor& ga = t.nodes_[a.id].grad;
            Tensor& gb = t.nodes_[b.id].grad;
            std::size_t n = A.rows(), k = A.cols(), m = B.rows();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    double gv = g(i, j);
                    if (gv == 0.0) continue;
                    for (std::size_t p = 0; p < k; ++p) {
                        ga(i, p) += gv * B(j, p);
                        gb(j, p) += gv * A(i, p);
                    }
                }
        });
    }

    Var add(Var a, Var b) { return elementwise2(a, b, "add", [](double x, double y) { return x + y; }, 1); }
    Var sub(Var a, Var b) { return elementwise2(a, b, "sub", [](double x, double y) { return x - y; }, 2); }
    Var mul(Var a, Var b) { return elementwise2(a, b, "mul", [](double x, double y) { return x * y; }, 3); }

    Var scale(Var a, double alpha) {
        Tensor out = value(a);
        for (double& v : out.values()) v *= alpha;
        return push(std::move(out), [a, alpha](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += alpha * g[i];
        });
    }

    /// Adds a length-M bias vector to every row of an [N,M] matrix.
    Var add_rowvec(Var m, Var bias) {
        const Tensor& M = value(m);
        const Tensor& B = value(bias);
        require(M.rank() == 2 && B.size() == M.cols(),
                "add_rowvec shapes " + M.shape_str() + " + " + B.shape_str());
        Tensor out = M;
        for (std::size_t i = 0; i < M.rows(); ++i)
            for (std::size_t j = 0; j < M.cols(); ++j) out(i, j) += B[j];
        return push(std::move(out), [m, bias](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& gm = t.nodes_[m.id].grad;
            Tensor& gb = t.nodes_[bias.id].grad;
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j) {
                    gm(i, j) += g(i, j);
                    gb[j] += g(i, j);
                }
        });
    }

    Var tanh_act(Var a) {
        Tensor out = value(a);
        for (double& v : out.values()) v = std::tanh(v);
        return push(std::move(out), [a](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& y = t.nodes_[self].value;
            Tensor& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
        });
    }

    Var relu(Var a) {
        Tensor out = value(a);
        for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
        return push(std::move(out), [a](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& x = t.value(a);
            Tensor& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i)
                if (x[i] > 0.0) ga[i] += g[i];
        });
    }

    Var exp_(Var a) {
        Tensor out = value(a);
        for (double& v : out.values()) v = std::exp(v);
        return push(std::move(out), [a](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& y = t.nodes_[self].value;
            Tensor& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
        });
    }

    /// Natural log; caller guarantees strictly positive inputs.
    Var log_(Var a) {
        Tensor out = value(a);
        for (double& v : out.values()) v = std::log(v);
        return push(std::move(out), [a](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& x = t.value(a);
            Tensor& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / x[i];
        });
    }

    /// log(max(x, eps)); zero gradient where the clamp is active.
    Var log_clamped(Var a, double eps) {
        Tensor out = value(a);
        for (double& v : out.values()) v = std::log(v < eps ? eps : v);
        return push(std::move(out), [a, eps](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& x = t.value(a);
            Tensor& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i)
                if (x[i] >= eps) ga[i] += g[i] / x[i];
        });
    }

    Var sqrt_(Var a) {
        Tensor out = value(a);
        for (double& v : out.values()) v = std::sqrt(v);
        return push(std::move(out), [a](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& y = t.nodes_[self].value;
            Tensor& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * 0.5 / y[i];
        });
    }

    /// Numerically stabilized rowwise softmax of an [N,C] matrix.
    Var softmax_rows(Var a) {
        const Tensor& X = value(a);
        require(X.rank() == 2, "softmax_rows expects a matrix, got " + X.shape_str());
        if (!X.all_finite()) throw NumericError("softmax input contains non-finite values");
        Tensor out({X.rows(), X.cols()});
        for (std::size_t i = 0; i < X.rows(); ++i) {
            double mx = X(i, 0);
            for (std::size_t j = 1; j < X.cols(); ++j) mx = std::max(mx, X(i, j));
            double sum = 0.0;
            for (std::size_t j = 0; j < X.cols(); ++j) {
                out(i, j) = std::exp(X(i, j) - mx);
                sum += out(i, j);
            }
            for (std::size_t j = 0; j < X.cols(); ++j) out(i, j) /= sum;
        }
        return push(std::move(out), [a](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& p = t.nodes_[self].value;
            Tensor& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < g.rows(); ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * p(i, j);
                for (std::size_t j = 0; j < g.cols(); ++j)
                    ga(i, j) += p(i, j) * (g(i, j) - dot);
            }
        });
    }

    /// Elementwise product with an untracked constant tensor (masking).
    Var mul_const(Var a, Tensor mask) {
        const Tensor& A = value(a);
        require(A.same_shape(mask), "mul_const shapes " + A.shape_str() + " vs " + mask.shape_str());
        Tensor out = A;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
        auto m = std::make_shared<Tensor>(std::move(mask));
        return push(std::move(out), [a, m](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (*m)[i];
        });
    }

    /// Sums each row of an [N,M] matrix into a length-N vector.
    Var row_sum(Var a) {
        const Tensor& A = value(a);
        require(A.rank() == 2, "row_sum expects a matrix, got " + A.shape_str());
        Tensor out({A.rows()});
        for (std::size_t i = 0; i < A.rows(); ++i)
            for (std::size_t j = 0; j < A.cols(); ++j) out[i] += A(i, j);
        return push(std::move(out), [a](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < ga.rows(); ++i)
                for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g[i];
        });
    }

    Var sum_all(Var a) {
        const Tensor& A = value(a);
        Tensor out({1});
        for (double v : A.values()) out[0] += v;
        return push(std::move(out), [a](Tape& t, std::size_t self) {
            double g = t.nodes_[self].grad[0];
            Tensor& ga = t.nodes_[a.id].grad;
            for (double& v : ga.values()) v += g;
        });
    }

    /// Divides row i of an [N,M] matrix by col[i] (length-N vector).
    Var div_colvec(Var m, Var col) {
        const Tensor& M = value(m);
        const Tensor& V = value(col);
        require(M.rank() == 2 && V.size() == M.rows(),
                "div_colvec shapes " + M.shape_str() + " / " + V.shape_str());
        Tensor out = M;
        for (std::size_t i = 0; i < M.rows(); ++i)
            for (std::size_t j = 0; j < M.cols(); ++j) out(i, j) /= V[i];
        return push(std::move(out), [m, col](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& y = t.nodes_[self].value;
            const Tensor& V = t.value(col);
            Tensor& gm = t.nodes_[m.id].grad;
            Tensor& gv = t.nodes_[col.id].grad;
            for (std::size_t i = 0; i < g.rows(); ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < g.cols(); ++j) {
                    gm(i, j) += g(i, j) / V[i];
                    acc += g(i, j) * y(i, j);
                }
                gv[i] -= acc / V[i];
            }
        });
    }

    /// Gathers the given rows of an [N,M] matrix; backward scatter-adds.
    Var select_rows(Var a, std::vector<std::size_t> idx) {
        const Tensor& A = value(a);
        require(A.rank() == 2, "select_rows expects a matrix, got " + A.shape_str());
        Tensor out({idx.size(), A.cols()});
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] >= A.rows()) throw GraphError("select_rows index out of range");
            for (std::size_t j = 0; j < A.cols(); ++j) out(i, j) = A(idx[i], j);
        }
        auto ids = std::make_shared<std::vector<std::size_t>>(std::move(idx));
        return push(std::move(out), [a, ids](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < ids->size(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j) ga((*ids)[i], j) += g(i, j);
        });
    }

    Var reshape(Var a, std::vector<std::size_t> shape) {
        Tensor out(std::move(shape), value(a).values());
        return push(std::move(out), [a](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        });
    }

    /// Valid-padding stride-1 2d convolution. x is [N,Cin,H,W], kernel is
    /// [Cout,Cin,KH,KW]; output [N,Cout,H-KH+1,W-KW+1].
    Var conv2d(Var x, Var kernel) {
        const Tensor& X = value(x);
        const Tensor& K = value(kernel);
        require(X.rank() == 4 && K.rank() == 4 && X.shape()[1] == K.shape()[1] &&
                    X.shape()[2] >= K.shape()[2] && X.shape()[3] >= K.shape()[3],
                "conv2d shapes " + X.shape_str() + " * " + K.shape_str());
        std::size_t n = X.shape()[0], cin = X.shape()[1], h = X.shape()[2], w = X.shape()[3];
        std::size_t cout = K.shape()[0], kh = K.shape()[2], kw = K.shape()[3];
        std::size_t oh = h - kh + 1, ow = w - kw + 1;
        Tensor out({n, cout, oh, ow});
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t oc = 0; oc < cout; ++oc)
                for (std::size_t i = 0; i < oh; ++i)
                    for (std::size_t j = 0; j < ow; ++j) {
                        double acc = 0.0;
                        for (std::size_t ic = 0; ic < cin; ++ic)
                            for (std::size_t di = 0; di < kh; ++di)
                                for (std::size_t dj = 0; dj < kw; ++dj)
                                    acc += X.at4(b, ic, i + di, j + dj) * K.at4(oc, ic, di, dj);
                        out.at4(b, oc, i, j) = acc;
                    }
        return push(std::move(out), [x, kernel](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& X = t.value(x);
            const Tensor& K = t.value(kernel);
            Tensor& gx = t.nodes_[x.id].grad;
            Tensor& gk = t.nodes_[kernel.id].grad;
            std::size_t n = X.shape()[0], cin = X.shape()[1];
            std::size_t cout = K.shape()[0], kh = K.shape()[2], kw = K.shape()[3];
            std::size_t oh = g.shape()[2], ow = g.shape()[3];
            for (std::size_t b = 0; b < n; ++b)
                for (std::size_t oc = 0; oc < cout; ++oc)
                    for (std::size_t i = 0; i < oh; ++i)
                        for (std::size_t j = 0; j < ow; ++j) {
                            double gv = g.at4(b, oc, i, j);
                            if (gv == 0.0) continue;
                            for (std::size_t ic = 0; ic < cin; ++ic)
                                for (std::size_t di = 0; di < kh; ++di)
                                    for (std::size_t dj = 0; dj < kw; ++dj) {
                                        gx.at4(b, ic, i + di, j + dj) += gv * K.at4(oc, ic, di, dj);
                                        gk.at4(oc, ic, di, dj) += gv * X.at4(b, ic, i + di, j + dj);
                                    }
                        }
        });
    }

    /// Adds a per-channel bias to an [N,C,H,W] activation.
    Var add_chanvec(Var x, Var bias) {
        const Tensor& X = value(x);
        const Tensor& B = value(bias);
        require(X.rank() == 4 && B.size() == X.shape()[1],
                "add_chanvec shapes " + X.shape_str() + " + " + B.shape_str());
        Tensor out = X;
        std::size_t hw = X.shape()[2] * X.shape()[3];
        for (std::size_t b = 0; b < X.shape()[0]; ++b)
            for (std::size_t c = 0; c < X.shape()[1]; ++c)
                for (std::size_t k = 0; k < hw; ++k)
                    out[(b * X.shape()[1] + c) * hw + k] += B[c];
        return push(std::move(out), [x, bias](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& gx = t.nodes_[x.id].grad;
            Tensor& gb = t.nodes_[bias.id].grad;
            std::size_t nchan = g.shape()[1], hw = g.shape()[2] * g.shape()[3];
            for (std::size_t b = 0; b < g.shape()[0]; ++b)
                for (std::size_t c = 0; c < nchan; ++c)
                    for (std::size_t k = 0; k < hw; ++k) {
                        double gv = g[(b * nchan + c) * hw + k];
                        gx[(b * nchan + c) * hw + k] += gv;
                        gb[c] += gv;
                    }
        });
    }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&, std::size_t)> back;
    };

    const Node& node(Var v) const {
        if (v.id >= nodes_.size()) throw GraphError("variable is not on this tape");
        return nodes_[v.id];
    }

    Var push(Tensor value, std::function<void(Tape&, std::size_t)> back) {
        Node n;
        n.grad = Tensor(value.shape(), 0.0);
        n.value = std::move(value);
        n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return Var{nodes_.size() - 1};
    }

    template <typename F>
    Var elementwise2(Var a, Var b, const char* name, F fwd, int kind) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        require(A.same_shape(B), std::string(name) + " shapes " + A.shape_str() + " vs " + B.shape_str());
        Tensor out = A;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(A[i], B[i]);
        return push(std::move(out), [a, b, kind](Tape& t, std::size_t self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a.id].grad;
            Tensor& gb = t.nodes_[b.id].grad;
            const Tensor& A = t.value(a);
            const Tensor& B = t.value(b);
            for (std::size_t i = 0; i < g.size(); ++i) {
                switch (kind) {
                    case 1:  // add
                        ga[i] += g[i];
                        gb[i] += g[i];
                        break;
                    case 2:  // sub
                        ga[i] += g[i];
                        gb[i] -= g[i];
                        break;
                    case 3:  // mul
                        ga[i] += g[i] * B[i];
                        gb[i] += g[i] * A[i];
                        break;
                }
            }
        });
    }

    static void require(bool ok, const std::string& what) {
        if (!ok) throw ShapeError(what);
    }

    std::deque<Node> nodes_;

    friend struct Var;
};

}  // namespace adacm
