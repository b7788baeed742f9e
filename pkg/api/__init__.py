# API module for the hybrid teleportation simulator
