"""Simulation loop, reward and rollout inputs."""
