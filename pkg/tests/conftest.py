import pytest

from scenemon import SceneObject, default_object_model, load_bundled_asg, make_csg


@pytest.fixture(scope="session")
def om():
    return default_object_model()


@pytest.fixture(scope="session")
def ahead_asg(om):
    """Bundled braking-trigger property: halted obstacle close ahead."""
    return load_bundled_asg("obstacle-ahead", om)


def halted_obstacle_scene(om, *, t=0.0, obstacle_speed=0.0, gap=10.0,
                          obstacle_cls="Static", ego_speed=8.0,
                          obstacle_attrs=None):
    """One lane, the ego, and an obstacle `gap` meters ahead of it."""
    if obstacle_attrs is None:
        obstacle_attrs = {"velocity": obstacle_speed, "position": (gap, 0.0)}
    nodes = [
        SceneObject("ego", "Vehicle",
                    {"velocity": ego_speed, "position": (0.0, 0.0)}),
        SceneObject("obs", obstacle_cls, obstacle_attrs),
        SceneObject("lane1", "Lane", {}),
    ]
    edges = [
        ("ego", "isIn", "lane1"),
        ("obs", "isIn", "lane1"),
        ("obs", "inFrontOf", "ego"),
    ]
    return make_csg(om, t, "ego", nodes, edges)


@pytest.fixture
def scene_factory(om):
    def build(**kw):
        return halted_obstacle_scene(om, **kw)
    return build
