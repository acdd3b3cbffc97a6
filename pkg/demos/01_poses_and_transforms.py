# Poses, rotations and 4x4 transforms.
#
# A pose is a grip-center position in mm plus roll/pitch/yaw in degrees.
# The rotation applies roll about x first, then pitch about y, then yaw about z.
import numpy as np

from hexakin.transforms import Pose, apply, combined_rotation, compose, homogeneous, inverse

pose = Pose(10.0, -5.0, 910.21, 5.0, -3.0, 20.0)
T = homogeneous(pose)
print("transform for", pose)
print(np.round(T, 4))

# rotation matrices are orthonormal with determinant one
R = combined_rotation(pose)
print("R^T R == I:", np.allclose(R.T @ R, np.eye(3)), " det:", round(np.linalg.det(R), 12))

# a point fixed to the platform, seen from the world
print("platform point (100, 0, 0) in world:", np.round(apply(T, [100.0, 0.0, 0.0]), 3))

# composing with the inverse gives back the identity
print("T @ inv(T) is identity:", np.allclose(compose(T, inverse(T)), np.eye(4)))

# angles are stored wrapped into (-180, 180]
print(Pose(0, 0, 0, 370, -190, 540).as_array()[3:])
