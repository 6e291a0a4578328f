# SAFE Drift Toolkit
