#include "srtk/visualizer.hpp"

namespace srtk {

namespace {

constexpr std::string_view kTemplate = R"HTML(<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>{{TITLE}}</title>
<style>
  html, body { margin: 0; height: 100%; font-family: sans-serif; background: #fafafa; }
  header { padding: 8px 12px; border-bottom: 1px solid #ddd; background: #fff; }
  header h1 { font-size: 16px; margin: 0; }
  header p { font-size: 12px; margin: 4px 0 0; color: #666; }
  #graph { display: block; width: 100%; height: calc(100% - 56px); cursor: grab; }
</style>
</head>
<body>
<header>
  <h1>{{TITLE}}</h1>
  <p>Drag nodes to move them, drag the background to pan, scroll to zoom.</p>
</header>
<canvas id="graph"></canvas>
<script id="graph-data" type="application/json">{{GRAPH_DATA}}</script>
<script>
{{GRAPH_SCRIPT}}
</script>
</body>
</html>
)HTML";

constexpr std::string_view kScript = R"JS((function () {
  "use strict";
  var data = JSON.parse(document.getElementById("graph-data").textContent);
  var canvas = document.getElementById("graph");
  var ctx = canvas.getContext("2d");
  var nodes = data.nodes.map(function (n, i) {
    var angle = (2 * Math.PI * i) / Math.max(data.nodes.length, 1);
    var radius = 60 + 12 * data.nodes.length;
    return { id: n.id, label: n.label, highlighted: n.highlighted,
             x: radius * Math.cos(angle), y: radius * Math.sin(angle) };
  });
  var index = {};
  nodes.forEach(function (n, i) { index[n.id] = i; });
  var edges = data.edges.map(function (e) {
    return { s: index[e.source], t: index[e.target], label: e.label };
  });

  function layout(iterations) {
    for (var it = 0; it < iterations; it++) {
      var cooling = 1 - it / iterations;
      var fx = new Array(nodes.length).fill(0);
      var fy = new Array(nodes.length).fill(0);
      for (var i = 0; i < nodes.length; i++) {
        for (var j = i + 1; j < nodes.length; j++) {
          var dx = nodes[i].x - nodes[j].x, dy = nodes[i].y - nodes[j].y;
          var d2 = Math.max(dx * dx + dy * dy, 1);
          var push = 4000 / d2;
          var d = Math.sqrt(d2);
          fx[i] += push * dx / d; fy[i] += push * dy / d;
          fx[j] -= push * dx / d; fy[j] -= push * dy / d;
        }
      }
      edges.forEach(function (e) {
        if (e.s === e.t) return;
        var a = nodes[e.s], b = nodes[e.t];
        var dx = b.x - a.x, dy = b.y - a.y;
        var d = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
        var pull = (d - 120) * 0.05;
        fx[e.s] += pull * dx / d; fy[e.s] += pull * dy / d;
        fx[e.t] -= pull * dx / d; fy[e.t] -= pull * dy / d;
      });
      nodes.forEach(function (n, k) {
        n.x += Math.max(-20, Math.min(20, fx[k])) * cooling;
        n.y += Math.max(-20, Math.min(20, fy[k])) * cooling;
      });
    }
  }
  layout(300);

  var view = { x: 0, y: 0, scale: 1 };
  function resize() {
    canvas.width = canvas.clientWidth;
    canvas.height = canvas.clientHeight;
    draw();
  }
  function toWorld(px, py) {
    return { x: (px - canvas.width / 2 - view.x) / view.scale,
             y: (py - canvas.height / 2 - view.y) / view.scale };
  }
  function draw() {
    ctx.setTransform(1, 0, 0, 1, 0, 0);
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.setTransform(view.scale, 0, 0, view.scale,
                     canvas.width / 2 + view.x, canvas.height / 2 + view.y);
    ctx.font = "11px sans-serif";
    ctx.textAlign = "center";
    edges.forEach(function (e) {
      var a = nodes[e.s], b = nodes[e.t];
      ctx.strokeStyle = "#999";
      ctx.lineWidth = 1 / view.scale;
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.stroke();
      var angle = Math.atan2(b.y - a.y, b.x - a.x);
      var tipX = b.x - 14 * Math.cos(angle), tipY = b.y - 14 * Math.sin(angle);
      ctx.fillStyle = "#999";
      ctx.beginPath();
      ctx.moveTo(tipX, tipY);
      ctx.lineTo(tipX - 8 * Math.cos(angle - 0.4), tipY - 8 * Math.sin(angle - 0.4));
      ctx.lineTo(tipX - 8 * Math.cos(angle + 0.4), tipY - 8 * Math.sin(angle + 0.4));
      ctx.fill();
      ctx.fillStyle = "#555";
      ctx.fillText(e.label, (a.x + b.x) / 2, (a.y + b.y) / 2 - 4);
    });
    nodes.forEach(function (n) {
      ctx.fillStyle = n.highlighted ? "#f4a261" : "#8ecae6";
      ctx.strokeStyle = n.highlighted ? "#c4621a" : "#219ebc";
      ctx.lineWidth = 2 / view.scale;
      ctx.beginPath();
      ctx.arc(n.x, n.y, 12, 0, 2 * Math.PI);
      ctx.fill();
      ctx.stroke();
      ctx.fillStyle = "#222";
      ctx.font = (n.highlighted ? "bold " : "") + "12px sans-serif";
      ctx.fillText(n.label, n.x, n.y + 26);
      ctx.font = "11px sans-serif";
    });
  }

  var drag = null;
  canvas.addEventListener("mousedown", function (ev) {
    var p = toWorld(ev.offsetX, ev.offsetY);
    for (var i = nodes.length - 1; i >= 0; i--) {
      var dx = nodes[i].x - p.x, dy = nodes[i].y - p.y;
      if (dx * dx + dy * dy <= 144) { drag = { node: i }; return; }
    }
    drag = { panX: ev.offsetX - view.x, panY: ev.offsetY - view.y };
    canvas.style.cursor = "grabbing";
  });
  canvas.addEventListener("mousemove", function (ev) {
    if (!drag) return;
    if (drag.node !== undefined) {
      var p = toWorld(ev.offsetX, ev.offsetY);
      nodes[drag.node].x = p.x;
      nodes[drag.node].y = p.y;
    } else {
      view.x = ev.offsetX - drag.panX;
      view.y = ev.offsetY - drag.panY;
    }
    draw();
  });
  window.addEventListener("mouseup", function () {
    drag = null;
    canvas.style.cursor = "grab";
  });
  canvas.addEventListener("wheel", function (ev) {
    ev.preventDefault();
    var factor = ev.deltaY < 0 ? 1.1 : 1 / 1.1;
    var before = toWorld(ev.offsetX, ev.offsetY);
    view.scale = Math.max(0.1, Math.min(10, view.scale * factor));
    var after = toWorld(ev.offsetX, ev.offsetY);
    view.x += (after.x - before.x) * view.scale;
    view.y += (after.y - before.y) * view.scale;
    draw();
  }, { passive: false });
  window.addEventListener("resize", resize);
  resize();
})();)JS";

}  // namespace

std::string_view default_html_template() { return kTemplate; }

std::string_view graph_view_script() { return kScript; }

}  // namespace srtk
