#include "sofsyn/demo_system.hpp"

namespace sofsyn {

UncertainSystem demo_system() {
  UncertainSystem sys;
  sys.n = 5;
  sys.m = 3;
  sys.p = 2;
  sys.q = 2;
  sys.d = 1;

  sys.A.resize(5, 5);
  sys.A << 0.5000, -0.5975,  0.3735,  0.0457,  0.3575,
           0.2500,  0.3000,  0.4017,  0.1114,  0.0227,
           0.4880,  0.1384,  0.2500,  0.7500,  0.7500,
           0.3838,  0.0974,  0.5000,  0.2500,  0.5000,
           0.0347,  0.1865, -0.2500,  0.5000,  0.2500;

  sys.B1.resize(5, 3);
  sys.B1 << 0.7, 0.8, 0.0,
            0.4, 0.9, 0.9,
            0.9, 0.9, 0.2,
            0.9, 0.6, 0.7,
            0.0, 0.5, 0.3;

  sys.B2 = Matrix::Ones(5, 1);

  sys.C.resize(2, 5);
  sys.C << 0.5, 0.2, 0.0, 0.0, 0.3,
           0.0, 0.2, 0.1, 0.3, 0.0;

  sys.D.resize(2, 1);
  sys.D << 0.2,
           0.2;

  sys.H = 0.15 * Matrix::Identity(5, 5);

  sys.M1.resize(5, 2);
  sys.M1 << 0.1, 0.0,
            0.1, 0.1,
            0.1, 0.1,
            0.0, 0.1,
            0.0, 0.2;

  sys.M2.resize(2, 2);
  sys.M2 << 0.0, 0.1,
            0.1, 0.2;

  sys.N.resize(2, 5);
  sys.N << 0.3, 0.15, 0.1, 0.0, 0.2,
           0.1, 0.2,  0.1, 0.2, 0.0;

  Vector coefficients(5);
  coefficients << 0.1, 0.2, 0.3, 0.0, 0.1;
  Eigen::VectorXi sources(5);
  sources << 2, 3, 0, 0, 1;  // phi_i(x) = a_i * sin(x[s_i])
  sys.phi = NonlinearityDescriptor::coordinate_sinusoid(coefficients, sources);
  sys.gamma = 0.3;

  sys.validate();
  return sys;
}

}  // namespace sofsyn
