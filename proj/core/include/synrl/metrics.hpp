#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace synrl {

struct MetricsRow {
    std::size_t iteration = 0;
    double train_loss = 0.0;
    std::optional<int> reward;  // +1 / -1; absent on the initial row and for gradient descent
    std::optional<double> train_acc;
    std::optional<double> val_loss;
    std::optional<double> val_acc;
    double alpha_s = 0.0;  // step size in effect (learning rate for gradient descent)
    bool batch_boundary = false;
};

// Per-iteration records shared by the synaptic trainer and gradient descent.
class MetricsLog {
public:
    static const char* csv_header();
    static std::string csv_row(const MetricsRow& row);

    void append(MetricsRow row);
    const std::vector<MetricsRow>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }
    const MetricsRow& back() const { return rows_.back(); }

    std::string to_csv() const;
    static MetricsLog from_csv(const std::string& text);

    // Last row carrying an accuracy measurement, if any.
    const MetricsRow* last_evaluated() const;

    // First iteration whose training accuracy reached `threshold`.
    std::optional<std::size_t> first_iteration_reaching(double threshold) const;

private:
    std::vector<MetricsRow> rows_;
};

}  // namespace synrl
