#include "carleman/field.hpp"

namespace carleman {

SpaceTimeField sample_field(const AnnulusGrid& grid, int n_comp,
                            const std::function<double(int, double, double, double)>& f) {
    SpaceTimeField out(n_comp, grid.n_time(), grid.n_space());
    for (int c = 0; c < n_comp; ++c)
        for (int k = 0; k < grid.n_time(); ++k) {
            auto lv = out.level(c, k);
            const double t = grid.time(k);
            for (int i = 0; i <= grid.nr; ++i) {
                const double r = grid.radius(i);
                for (int j = 0; j < grid.ntheta; ++j)
                    lv[grid.node(i, j)] = f(c, t, r, grid.theta(j));
            }
        }
    return out;
}

}  // namespace carleman
