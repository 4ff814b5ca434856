#include "fixtures.hpp"

namespace fixtures {

using namespace procomplete;

const char* const kAdmissionXml = R"(<?xml version="1.0" encoding="UTF-8"?>
<bpmn:definitions xmlns:bpmn="http://www.omg.org/spec/BPMN/20100524/MODEL"
                  xmlns:bpmndi="http://www.omg.org/spec/BPMN/20100524/DI"
                  id="Definitions_1" targetNamespace="http://bpmn.io/schema/bpmn">
  <bpmn:collaboration id="Collab_1">
    <bpmn:participant id="P_1" name="University" processRef="Admission" />
  </bpmn:collaboration>
  <bpmn:process id="Admission" isExecutable="false">
    <bpmn:laneSet id="LaneSet_1">
      <bpmn:lane id="Lane_1" name="Admission office" />
    </bpmn:laneSet>
    <bpmn:startEvent id="start">
      <bpmn:outgoing>f1</bpmn:outgoing>
    </bpmn:startEvent>
    <bpmn:task id="check" name="Check documents" />
    <bpmn:userTask id="evaluate" name="  Evaluate " />
    <bpmn:exclusiveGateway id="split" />
    <bpmn:task id="invite" name="Invite to an aptitude test" />
    <bpmn:task id="keep" name="Keep in the applicant pool" />
    <bpmn:exclusiveGateway id="merge" />
    <bpmn:task id="rank" name="Rank students according to GPA and the test results" />
    <bpmn:endEvent id="end" />
    <bpmn:dataObjectReference id="DataRef_1" name="Application file" />
    <bpmn:sequenceFlow id="f1" sourceRef="start" targetRef="check" />
    <bpmn:sequenceFlow id="f2" sourceRef="check" targetRef="evaluate" />
    <bpmn:sequenceFlow id="f3" sourceRef="evaluate" targetRef="split" />
    <bpmn:sequenceFlow id="f4" sourceRef="split" targetRef="invite" />
    <bpmn:sequenceFlow id="f5" sourceRef="split" targetRef="keep" />
    <bpmn:sequenceFlow id="f6" sourceRef="invite" targetRef="merge" />
    <bpmn:sequenceFlow id="f7" sourceRef="keep" targetRef="merge" />
    <bpmn:sequenceFlow id="f8" sourceRef="merge" targetRef="rank" />
    <bpmn:sequenceFlow id="f9" sourceRef="rank" targetRef="end" />
  </bpmn:process>
  <bpmndi:BPMNDiagram id="Diagram_1" />
</bpmn:definitions>
)";

ProcessGraph admission() { return parse_bpmn(kAdmissionXml).front(); }

ProcessGraph chain_process(const std::string& id,
                           const std::vector<std::string>& labels) {
  std::vector<Node> nodes;
  std::vector<Flow> flows;
  for (const auto& l : labels) nodes.push_back({l, l, ElementKind::Task});
  for (std::size_t i = 0; i + 1 < labels.size(); ++i)
    flows.push_back({"f" + std::to_string(i), labels[i], labels[i + 1]});
  return ProcessGraph(id, std::move(nodes), std::move(flows));
}

std::vector<ProcessGraph> ab_corpus() {
  return {chain_process("A", {"x", "y", "z", "a"}),
          chain_process("B", {"x", "y", "z", "b"})};
}

ProcessGraph query_c() { return chain_process("C", {"x", "y", "z"}); }

}  // namespace fixtures
